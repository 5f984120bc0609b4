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

#ifndef SORTGEN_EVALUATION_HPP_
#define SORTGEN_EVALUATION_HPP_

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sortgen/config.hpp"
#include "sortgen/generation.hpp"
#include "sortgen/model.hpp"
#include "sortgen/simulator.hpp"

namespace sortgen {

enum class Method { kSortGen, kBaseline, kTemplate, kRankingTopQueue };

std::string_view to_string(Method m);

/// Builds the slate a method would show for one pool. kBaseline, kTemplate
/// and kRankingTopQueue never consult the model.
SubList run_method(Method method, const Pool& pool, const SortModel& model,
                   const GenerationParams& params);

/// Ground-truth cumulative values per position, averaged over pools.
struct MethodCurves {
  std::string method;
  std::vector<double> click;
  std::vector<double> pay;
  std::vector<double> gmv;
  std::vector<double> combined;

  double final_combined() const { return combined.empty() ? 0.0 : combined.back(); }
};

MethodCurves method_curves(Method method, std::string label, std::span<const Pool> pools,
                           const SortModel& model, const GroundTruthModel& gt,
                           const GenerationParams& params);

/// All four methods, in the order sortgen, baseline, template,
/// ranking_top_queue.
std::vector<MethodCurves> evaluate_curves(std::span<const Pool> pools,
                                          const SortModel& model,
                                          const GroundTruthModel& gt,
                                          const GenerationParams& params);

/// Tab-separated: method, position, click, pay, gmv, combined. One row per
/// method and position.
std::string curves_table(std::span<const MethodCurves> curves);

struct DiversityStats {
  double mean_window_similarity = 0.0;  // mean over positions 2..l of max windowed sim
  double mean_distinct_categories = 0.0;
};

DiversityStats diversity_stats(std::span<const Pool> pools, const SortModel& model,
                               const GenerationParams& params);

struct OracleStudyConfig {
  std::size_t pools = 100;
  std::size_t pool_size = 8;
  std::size_t list_length = 4;
  std::size_t random_lists = 100;
  std::uint64_t seed = 11;
};

OracleStudyConfig oracle_study_config_from(const ConfigFile& file, std::uint64_t seed);

struct OracleStudy {
  std::uint64_t arrangements_per_pool = 0;
  std::vector<double> greedy_ratio;  // greedy / optimum, per pool
  std::vector<double> random_ratio;  // mean random-list / optimum, per pool
  double mean_greedy_ratio = 0.0;
  double mean_random_ratio = 0.0;
  double min_greedy_ratio = 0.0;
  std::size_t greedy_above_optimum = 0;  // pools where greedy beat the optimum
};

/// Greedy generation at lambda = 1 against exhaustive search on small pools
/// drawn from `catalog`, all scored by the model's own value.
OracleStudy oracle_study(const SortModel& model, std::span<const Item> catalog,
                         const OracleStudyConfig& config);

std::string oracle_report(const OracleStudy& study, const OracleStudyConfig& config);

struct BenchConfig {
  std::size_t slates = 1000;
  std::chrono::nanoseconds per_call_overhead{std::chrono::microseconds(100)};
  std::uint64_t seed = 13;
};

BenchConfig bench_config_from(const ConfigFile& file, std::uint64_t seed);

struct LatencySummary {
  double median_ns = 0.0;
  double p99_ns = 0.0;
  double mean_ns = 0.0;
};

LatencySummary summarize(std::vector<std::uint64_t> samples_ns);

struct BenchReport {
  std::size_t slates = 0;
  std::size_t queues = 0;
  std::size_t list_length = 0;
  std::chrono::nanoseconds per_call_overhead{0};
  LatencySummary generate;
  LatencySummary reference;
  std::size_t generate_max_invocations = 0;
  std::size_t reference_min_invocations = 0;
  std::size_t reference_max_invocations = 0;
  double generate_overhead_ns = 0.0;   // simulated, per slate
  double reference_overhead_ns = 0.0;  // simulated, per slate
  double overhead_ratio = 0.0;
  double latency_ratio = 0.0;          // reference median / generate median
  std::size_t mismatched_outputs = 0;
};

BenchReport run_bench(const SortModel& model, std::span<const Pool> pools,
                      const GenerationParams& params, const BenchConfig& config);

std::string bench_report_text(const BenchReport& r);

}  // namespace sortgen

#endif  // SORTGEN_EVALUATION_HPP_
