// Copyright 2026 The SortGen Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SORTGEN_CHECKPOINT_HPP_
#define SORTGEN_CHECKPOINT_HPP_

#include <optional>
#include <string>
#include <string_view>

#include "sortgen/config.hpp"
#include "sortgen/model.hpp"

namespace sortgen {

inline constexpr std::string_view kCheckpointFormat = "sortgen-ckpt-v1";

// Text layout:
//
//   sortgen-ckpt-v1
//   config_hash <16 hex digits>
//   model <model_signature>
//   params <count>
//   param <name> <rank> <extents...>
//   <values, %.17g, space separated>
//   ...
//   end
std::string checkpoint_to_string(const SortModel& model);
void save_checkpoint(const std::string& path, const SortModel& model);

/// Parses a checkpoint. Non-model fields of the returned model's config come
/// from `base` (defaults when absent). If `base` is given, its model
/// signature must hash to the checkpoint's config_hash.
SortModel checkpoint_from_string(std::string_view text,
                                 const std::optional<EngineConfig>& base = std::nullopt);
SortModel load_checkpoint(const std::string& path,
                          const std::optional<EngineConfig>& base = std::nullopt);

/// FNV-1a over the checkpoint file bytes.
std::uint64_t checkpoint_file_hash(const std::string& path);

std::string hex64(std::uint64_t v);

}  // namespace sortgen

#endif  // SORTGEN_CHECKPOINT_HPP_
