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

#include "sortgen/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <cstdio>
#include <numeric>
#include <random>
#include <set>

#include "sortgen/queues.hpp"

namespace sortgen {
namespace {

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), pattern, v);
  return buf;
}

// Uniformly random ordered selection of `length` pool indices.
SubList random_list(std::size_t pool_size, std::size_t length, std::mt19937_64& rng) {
  std::vector<std::size_t> idx(pool_size);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  SubList out;
  for (std::size_t k = 0; k < length; ++k) {
    std::uniform_int_distribution<std::size_t> pick(k, pool_size - 1);
    std::swap(idx[k], idx[pick(rng)]);
    out.items.push_back(idx[k]);
    out.source_queues.push_back(0);
  }
  return out;
}

}  // namespace

std::string_view to_string(Method m) {
  switch (m) {
    case Method::kSortGen: return "sortgen";
    case Method::kBaseline: return "baseline";
    case Method::kTemplate: return "template";
    case Method::kRankingTopQueue: return "ranking_top_queue";
  }
  return "unknown";
}

SubList run_method(Method method, const Pool& pool, const SortModel& model,
                   const GenerationParams& params) {
  const EngineConfig& c = model.config();
  const std::span<const Item> items = pool.candidates;
  switch (method) {
    case Method::kSortGen: {
      CandidateQueues q = build_queues(items, c.queue_specs, c.partition_strategy,
                                       params.list_length);
      return generate(items, pool.user, std::move(q), model, params).result;
    }
    case Method::kBaseline:
      return prior_score_order(items, params.list_length);
    case Method::kTemplate: {
      CandidateQueues q = build_queues(items, c.queue_specs, c.partition_strategy,
                                       params.list_length);
      return generate_template(items, std::move(q), c.template_pattern, params.list_length)
          .result;
    }
    case Method::kRankingTopQueue: {
      const std::vector<QueueSpec> one{ranking_top_queue_spec(params.weights)};
      CandidateQueues q = build_queues(items, one, c.partition_strategy, params.list_length);
      const std::vector<int> pattern{0};
      return generate_template(items, std::move(q), pattern, params.list_length).result;
    }
  }
  throw ConfigError("run_method: unknown method");
}

MethodCurves method_curves(Method method, std::string label, std::span<const Pool> pools,
                           const SortModel& model, const GroundTruthModel& gt,
                           const GenerationParams& params) {
  if (pools.empty()) throw ConfigError("method_curves: no evaluation pools");
  const std::size_t l = params.list_length;
  MethodCurves out;
  out.method = std::move(label);
  out.click.assign(l, 0.0);
  out.pay.assign(l, 0.0);
  out.gmv.assign(l, 0.0);
  for (const Pool& pool : pools) {
    const SubList list = run_method(method, pool, model, params);
    const ValueCurves v = ground_truth_curves(gt, pool.user, pool.candidates, list);
    for (std::size_t t = 0; t < l; ++t) {
      out.click[t] += v.click[t];
      out.pay[t] += v.pay[t];
      out.gmv[t] += v.gmv[t];
    }
  }
  const double n = static_cast<double>(pools.size());
  for (std::size_t t = 0; t < l; ++t) {
    out.click[t] /= n;
    out.pay[t] /= n;
    out.gmv[t] /= n;
    out.combined.push_back(combine(params.weights, out.click[t], out.pay[t], out.gmv[t]));
  }
  return out;
}

std::vector<MethodCurves> evaluate_curves(std::span<const Pool> pools,
                                          const SortModel& model,
                                          const GroundTruthModel& gt,
                                          const GenerationParams& params) {
  std::vector<MethodCurves> out;
  for (Method m : {Method::kSortGen, Method::kBaseline, Method::kTemplate,
                   Method::kRankingTopQueue}) {
    out.push_back(method_curves(m, std::string(to_string(m)), pools, model, gt, params));
  }
  return out;
}

std::string curves_table(std::span<const MethodCurves> curves) {
  std::string out = "method\tposition\tclick\tpay\tgmv\tcombined\n";
  for (const MethodCurves& c : curves) {
    for (std::size_t t = 0; t < c.click.size(); ++t) {
      char buf[256];
      std::snprintf(buf, sizeof(buf), "%s\t%zu\t%.10g\t%.10g\t%.10g\t%.10g\n",
                    c.method.c_str(), t + 1, c.click[t], c.pay[t], c.gmv[t], c.combined[t]);
      out += buf;
    }
  }
  return out;
}

DiversityStats diversity_stats(std::span<const Pool> pools, const SortModel& model,
                               const GenerationParams& params) {
  if (pools.empty()) throw ConfigError("diversity_stats: no pools");
  DiversityStats s;
  for (const Pool& pool : pools) {
    const SubList list = run_method(Method::kSortGen, pool, model, params);
    double sim = 0.0;
    std::set<int> cats;
    for (std::size_t t = 0; t < list.size(); ++t) {
      const Item& it = pool.candidates[list.items[t]];
      cats.insert(it.category);
      if (t == 0) continue;
      SubList prefix;
      prefix.items.assign(list.items.begin(), list.items.begin() + static_cast<long>(t));
      prefix.source_queues.assign(t, 0);
      sim += max_window_similarity(it, pool.candidates, prefix, params.window);
    }
    if (list.size() > 1) sim /= static_cast<double>(list.size() - 1);
    s.mean_window_similarity += sim;
    s.mean_distinct_categories += static_cast<double>(cats.size());
  }
  s.mean_window_similarity /= static_cast<double>(pools.size());
  s.mean_distinct_categories /= static_cast<double>(pools.size());
  return s;
}

OracleStudyConfig oracle_study_config_from(const ConfigFile& file, std::uint64_t seed) {
  OracleStudyConfig c;
  c.pools = file.get_size("oracle.pools", c.pools);
  c.pool_size = file.get_size("oracle.l_s", c.pool_size);
  c.list_length = file.get_size("oracle.l_o", c.list_length);
  c.random_lists = file.get_size("oracle.random_lists", c.random_lists);
  c.seed = file.get_u64("oracle.seed", seed);
  return c;
}

OracleStudy oracle_study(const SortModel& model, std::span<const Item> catalog,
                         const OracleStudyConfig& config) {
  if (config.pools == 0) throw ConfigError("oracle study needs at least one pool");
  if (config.list_length > config.pool_size) {
    throw ConfigError("oracle.l_o exceeds oracle.l_s");
  }
  OracleStudy study;
  study.arrangements_per_pool = arrangements(config.pool_size, config.list_length);
  if (study.arrangements_per_pool > kOracleLimit) {
    throw ConfigError("oracle guard exceeded: " +
                      std::to_string(study.arrangements_per_pool) +
                      " arrangements per pool (limit " + std::to_string(kOracleLimit) + ")");
  }
  const EngineConfig& c = model.config();
  GenerationParams params = GenerationParams::from(c);
  params.list_length = config.list_length;
  params.lambda = 1.0;
  std::mt19937_64 rng(mix_seed(config.seed, 0x0AC1E));

  study.min_greedy_ratio = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < config.pools; ++p) {
    const Pool pool = sample_pool(catalog, config.pool_size, c.d_user,
                                  mix_seed(config.seed, 9'000'000 + p));
    const std::span<const Item> items = pool.candidates;
    const OracleResult best =
        exhaustive_oracle(items, pool.user, model, params.weights, config.list_length);
    CandidateQueues q =
        build_queues(items, c.queue_specs, c.partition_strategy, config.list_length);
    const GenerationTrace greedy = generate(items, pool.user, std::move(q), model, params);
    const double opt = best.value.combined;
    const double g = opt > 0.0 ? greedy.value.combined / opt : 1.0;
    double rand_sum = 0.0;
    for (std::size_t r = 0; r < config.random_lists; ++r) {
      const SubList list = random_list(items.size(), config.list_length, rng);
      const double v = model_list_value(model, items, pool.user, list, params.weights).combined;
      rand_sum += opt > 0.0 ? v / opt : 1.0;
    }
    const double rr = config.random_lists > 0 ? rand_sum / static_cast<double>(config.random_lists) : 0.0;
    if (greedy.value.combined > opt) ++study.greedy_above_optimum;
    study.greedy_ratio.push_back(g);
    study.random_ratio.push_back(rr);
    study.min_greedy_ratio = std::min(study.min_greedy_ratio, g);
  }
  const double n = static_cast<double>(config.pools);
  study.mean_greedy_ratio =
      std::accumulate(study.greedy_ratio.begin(), study.greedy_ratio.end(), 0.0) / n;
  study.mean_random_ratio =
      std::accumulate(study.random_ratio.begin(), study.random_ratio.end(), 0.0) / n;
  return study;
}

std::string oracle_report(const OracleStudy& s, const OracleStudyConfig& c) {
  std::string out;
  out += "pools\t" + std::to_string(c.pools) + "\n";
  out += "pool_size\t" + std::to_string(c.pool_size) + "\n";
  out += "list_length\t" + std::to_string(c.list_length) + "\n";
  out += "arrangements_per_pool\t" + std::to_string(s.arrangements_per_pool) + "\n";
  out += "mean_greedy_ratio\t" + fmt("%.6f", s.mean_greedy_ratio) + "\n";
  out += "min_greedy_ratio\t" + fmt("%.6f", s.min_greedy_ratio) + "\n";
  out += "mean_random_ratio\t" + fmt("%.6f", s.mean_random_ratio) + "\n";
  out += "greedy_above_optimum\t" + std::to_string(s.greedy_above_optimum) + "\n";
  return out;
}

BenchConfig bench_config_from(const ConfigFile& file, std::uint64_t seed) {
  BenchConfig c;
  c.slates = file.get_size("bench.slates", c.slates);
  c.per_call_overhead = std::chrono::nanoseconds(static_cast<std::int64_t>(
      file.get_double("bench.overhead_us", 100.0) * 1000.0));
  c.seed = file.get_u64("bench.seed", seed);
  return c;
}

LatencySummary summarize(std::vector<std::uint64_t> samples) {
  LatencySummary s;
  if (samples.empty()) return s;
  std::sort(samples.begin(), samples.end());
  const std::size_t n = samples.size();
  s.median_ns = n % 2 == 1 ? static_cast<double>(samples[n / 2])
                           : 0.5 * static_cast<double>(samples[n / 2 - 1] + samples[n / 2]);
  const std::size_t p99 =
      std::min(n - 1, static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(n))) - 1);
  s.p99_ns = static_cast<double>(samples[p99]);
  double sum = 0.0;
  for (auto v : samples) sum += static_cast<double>(v);
  s.mean_ns = sum / static_cast<double>(n);
  return s;
}

BenchReport run_bench(const SortModel& model, std::span<const Pool> pools,
                      const GenerationParams& params, const BenchConfig& config) {
  if (pools.empty()) throw ConfigError("run_bench: no pools");
  const EngineConfig& c = model.config();
  BenchReport r;
  r.slates = config.slates;
  r.queues = c.num_queues();
  r.list_length = params.list_length;
  r.per_call_overhead = config.per_call_overhead;
  r.reference_min_invocations = std::numeric_limits<std::size_t>::max();
  std::vector<std::uint64_t> gen_ns, ref_ns;
  double gen_over = 0.0, ref_over = 0.0;
  for (std::size_t s = 0; s < config.slates; ++s) {
    const Pool& pool = pools[s % pools.size()];
    const std::span<const Item> items = pool.candidates;
    CandidateQueues q =
        build_queues(items, c.queue_specs, c.partition_strategy, params.list_length);
    const GenerationTrace g =
        generate(items, pool.user, q, model, params, config.per_call_overhead);
    const GenerationTrace ref = generate_iterative_reference(
        items, pool.user, std::move(q), model, params, config.per_call_overhead);
    gen_ns.push_back(g.wall_ns);
    ref_ns.push_back(ref.wall_ns);
    gen_over += static_cast<double>(g.simulated_overhead.count());
    ref_over += static_cast<double>(ref.simulated_overhead.count());
    r.generate_max_invocations = std::max(r.generate_max_invocations, g.forward_invocations);
    r.reference_min_invocations = std::min(r.reference_min_invocations, ref.forward_invocations);
    r.reference_max_invocations = std::max(r.reference_max_invocations, ref.forward_invocations);
    if (g.result != ref.result) ++r.mismatched_outputs;
  }
  if (config.slates == 0) r.reference_min_invocations = 0;
  r.generate = summarize(std::move(gen_ns));
  r.reference = summarize(std::move(ref_ns));
  const double n = static_cast<double>(std::max<std::size_t>(config.slates, 1));
  r.generate_overhead_ns = gen_over / n;
  r.reference_overhead_ns = ref_over / n;
  r.overhead_ratio = r.generate_overhead_ns > 0.0 ? r.reference_overhead_ns / r.generate_overhead_ns : 0.0;
  r.latency_ratio = r.generate.median_ns > 0.0 ? r.reference.median_ns / r.generate.median_ns : 0.0;
  return r;
}

std::string bench_report_text(const BenchReport& r) {
  std::string out;
  out += "slates\t" + std::to_string(r.slates) + "\n";
  out += "queues\t" + std::to_string(r.queues) + "\n";
  out += "list_length\t" + std::to_string(r.list_length) + "\n";
  out += "per_call_overhead_us\t" +
         fmt("%.3f", static_cast<double>(r.per_call_overhead.count()) / 1000.0) + "\n";
  out += "generate_invocations_max\t" + std::to_string(r.generate_max_invocations) + "\n";
  out += "reference_invocations_min\t" + std::to_string(r.reference_min_invocations) + "\n";
  out += "reference_invocations_max\t" + std::to_string(r.reference_max_invocations) + "\n";
  out += "generate_median_ms\t" + fmt("%.4f", r.generate.median_ns / 1e6) + "\n";
  out += "generate_p99_ms\t" + fmt("%.4f", r.generate.p99_ns / 1e6) + "\n";
  out += "reference_median_ms\t" + fmt("%.4f", r.reference.median_ns / 1e6) + "\n";
  out += "reference_p99_ms\t" + fmt("%.4f", r.reference.p99_ns / 1e6) + "\n";
  out += "generate_overhead_ms_per_slate\t" + fmt("%.4f", r.generate_overhead_ns / 1e6) + "\n";
  out += "reference_overhead_ms_per_slate\t" + fmt("%.4f", r.reference_overhead_ns / 1e6) + "\n";
  out += "overhead_ratio\t" + fmt("%.4f", r.overhead_ratio) + "\n";
  out += "latency_ratio\t" + fmt("%.4f", r.latency_ratio) + "\n";
  out += "mismatched_outputs\t" + std::to_string(r.mismatched_outputs) + "\n";
  return out;
}

}  // namespace sortgen
