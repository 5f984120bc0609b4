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

#ifndef SORTGEN_IO_HPP_
#define SORTGEN_IO_HPP_

#include <string>
#include <string_view>
#include <vector>

#include "sortgen/generation.hpp"
#include "sortgen/simulator.hpp"
#include "sortgen/types.hpp"

namespace sortgen {

inline constexpr std::string_view kDataFormat = "sortgen-data-v1";

/// Impressions go to `path`; the catalog goes to catalog_path(path). Each
/// file starts with a header record carrying the format version.
void write_dataset(const Dataset& data, const std::string& path);
Dataset read_dataset(const std::string& path);

/// "x.jsonl" -> "x.catalog.jsonl"; any other name gets ".catalog" appended.
std::string catalog_path(const std::string& dataset_path);

void write_catalog(std::span<const Item> catalog, const std::string& path);
std::vector<Item> read_catalog(const std::string& path);

/// In-memory forms. Errors carry "line N" (1-based) of the failing record.
std::string dataset_to_string(const Dataset& data);
Dataset dataset_from_strings(std::string_view samples_text,
                             std::string_view catalog_text);
std::string catalog_to_string(std::span<const Item> catalog);
std::vector<Item> catalog_from_string(std::string_view text);

/// One line-delimited record per generated slate.
std::string trace_record(const GenerationTrace& trace, std::string_view method = "sortgen");

std::string read_file(const std::string& path);
/// Writes via a temporary file and rename.
void write_file(const std::string& path, std::string_view contents);

}  // namespace sortgen

#endif  // SORTGEN_IO_HPP_
