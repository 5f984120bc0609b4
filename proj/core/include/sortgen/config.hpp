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

#ifndef SORTGEN_CONFIG_HPP_
#define SORTGEN_CONFIG_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "sortgen/types.hpp"

namespace sortgen {

enum class PartitionStrategy { kDfs, kBfs };
enum class LossMode { kOrderedRegression, kPointwise };
enum class HeadMode { kMonotone, kLiteral };

std::string_view to_string(PartitionStrategy s);
std::string_view to_string(LossMode m);
std::string_view to_string(HeadMode m);
PartitionStrategy parse_partition_strategy(std::string_view s);
LossMode parse_loss_mode(std::string_view s);
HeadMode parse_head_mode(std::string_view s);

/// The item-level terms a queue score may combine.
enum class ScoreTerm : std::size_t {
  kCtr = 0,
  kCvr,
  kCtrCvr,
  kPrice,
  kCtrCvrPrice,
};
inline constexpr std::size_t kNumScoreTerms = 5;

std::string_view to_string(ScoreTerm t);

/// One objective-specific candidate queue. Queues are partitioned in
/// ascending `priority`; the queue index reported in traces is the position
/// of the spec in EngineConfig::queue_specs.
struct QueueSpec {
  std::string name;
  std::array<double, kNumScoreTerms> coefficients{};
  int priority = 0;

  double coefficient(ScoreTerm t) const {
    return coefficients[static_cast<std::size_t>(t)];
  }
  bool operator==(const QueueSpec&) const = default;
};

/// Parses "name: 0.5*ctr + 0.5*ctr_cvr". A bare term means coefficient 1.
QueueSpec parse_queue_spec(std::string_view text, int priority);
std::string format_queue_spec(const QueueSpec& spec);

/// Shape, generation and objective settings shared by every module.
struct EngineConfig {
  std::size_t l_s = 30;
  std::size_t l_o = 10;

  std::size_t d_emb = 8;
  std::size_t d_user = 8;
  std::size_t d_position = 4;
  std::size_t d_score = 2;
  std::size_t d_model = 32;
  std::size_t n_layers = 2;
  std::size_t n_heads = 2;
  std::size_t head_hidden = 32;
  // Number of count thresholds per position; a length-l_o list holds at most
  // l_o actions.
  std::size_t max_count = 10;
  HeadMode head_mode = HeadMode::kMonotone;

  double lambda_mmr = 0.8;
  std::size_t window_w = 5;
  std::vector<QueueSpec> queue_specs = default_queue_specs();
  PartitionStrategy partition_strategy = PartitionStrategy::kBfs;
  LossMode loss_mode = LossMode::kOrderedRegression;
  ObjectiveWeights weights{};
  // Queue-index pattern for the rule-based template generator.
  std::vector<int> template_pattern{0, 1, 0, 0, 0, 0, 0, 0, 2, 0};
  std::uint64_t seed = 7;

  std::size_t input_width() const {
    return d_emb + d_position + d_user + d_score;
  }
  std::size_t num_queues() const { return queue_specs.size(); }

  static std::vector<QueueSpec> default_queue_specs();
  bool operator==(const EngineConfig&) const = default;
};

/// Returns the first violated invariant, or nullopt when the config is
/// usable by every module.
std::optional<std::string> validate_config(const EngineConfig& config);

/// Throws ConfigError when validate_config reports a violation.
void require_valid(const EngineConfig& config);

/// Canonical text of the fields that determine the model's parameter
/// layout, and its 64-bit FNV-1a hash. Checkpoints are keyed on this.
std::string model_signature(const EngineConfig& config);
std::uint64_t config_hash(const EngineConfig& config);

std::uint64_t fnv1a64(std::string_view bytes,
                      std::uint64_t seed = 0xcbf29ce484222325ULL);

/// A parsed "key = value" configuration file. '#' starts a comment. Keys may
/// repeat (used by `queue`); getters mark keys as consumed so callers can
/// reject typos via unused_keys().
class ConfigFile {
 public:
  static ConfigFile load(const std::string& path);
  static ConfigFile parse(std::string_view text,
                          std::string_view origin = "<string>");

  bool has(std::string_view key) const;
  std::vector<std::string> all(std::string_view key) const;
  std::optional<std::string> get(std::string_view key) const;

  std::size_t get_size(std::string_view key, std::size_t fallback) const;
  double get_double(std::string_view key, double fallback) const;
  std::uint64_t get_u64(std::string_view key, std::uint64_t fallback) const;
  std::string get_string(std::string_view key, std::string fallback) const;

  void set(std::string key, std::string value);
  std::vector<std::string> unused_keys() const;

 private:
  std::multimap<std::string, std::string, std::less<>> entries_;
  mutable std::set<std::string, std::less<>> consumed_;
  std::string origin_;
};

EngineConfig engine_config_from(const ConfigFile& file);
std::string engine_config_to_text(const EngineConfig& config);

}  // namespace sortgen

#endif  // SORTGEN_CONFIG_HPP_
