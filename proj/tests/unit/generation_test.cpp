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

#include <algorithm>
#include <array>
#include <numeric>
#include <cmath>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "sortgen/evaluation.hpp"
#include "sortgen/generation.hpp"
#include "sortgen/io.hpp"
#include "sortgen/queues.hpp"
#include "support.hpp"

namespace sortgen {
namespace {

using testing::make_item;

QueueSpec spec(std::string name, ScoreTerm term, double coef, int priority) {
  QueueSpec q;
  q.name = std::move(name);
  q.coefficients[static_cast<std::size_t>(term)] = coef;
  q.priority = priority;
  return q;
}

SortModel jittered_model(const EngineConfig& c, std::uint64_t seed, double scale = 0.3) {
  SortModel m = SortModel::initialize(c, seed);
  testing::jitter(m.params(), seed + 1, scale);
  return m;
}

TEST(CompositeScore, Examples) {
  const Item it = make_item(1, {1.0}, 40.0, 0.2, 0.1);
  QueueSpec mix = spec("mix", ScoreTerm::kCtr, 0.5, 0);
  mix.coefficients[static_cast<std::size_t>(ScoreTerm::kCtrCvr)] = 0.5;
  EXPECT_NEAR(composite_score(it, mix), 0.11, 1e-15);
  EXPECT_EQ(composite_score(it, spec("c", ScoreTerm::kCtr, 1.0, 0)), 0.2);
  EXPECT_EQ(composite_score(it, spec("p", ScoreTerm::kPrice, 1.0, 0)), 40.0);
  EXPECT_NEAR(composite_score(it, spec("g", ScoreTerm::kCtrCvrPrice, 1.0, 0)), 0.8, 1e-15);
}

// Click scores A .9, B .8, C .7, D .6; pay scores B .95, A .1, C .05, D .01.
std::vector<Item> four_items() {
  return {make_item(1, {1.0}, 0.1, 0.9, 0), make_item(2, {1.0}, 0.95, 0.8, 0),
          make_item(3, {1.0}, 0.05, 0.7, 0), make_item(4, {1.0}, 0.01, 0.6, 0)};
}

TEST(BuildQueues, DepthFirstExample) {
  const std::vector<QueueSpec> specs{spec("click", ScoreTerm::kCtr, 1, 0),
                                     spec("pay", ScoreTerm::kPrice, 1, 1)};
  const CandidateQueues q = build_queues(four_items(), specs, PartitionStrategy::kDfs, 2);
  EXPECT_EQ(q.queue(0), (std::vector<std::size_t>{0, 1}));  // A, B
  EXPECT_EQ(q.queue(1), (std::vector<std::size_t>{2, 3}));  // C, D
}

TEST(BuildQueues, BreadthFirstExample) {
  const std::vector<QueueSpec> specs{spec("click", ScoreTerm::kCtr, 1, 0),
                                     spec("pay", ScoreTerm::kPrice, 1, 1)};
  const CandidateQueues q = build_queues(four_items(), specs, PartitionStrategy::kBfs, 2);
  EXPECT_EQ(q.queue(0), (std::vector<std::size_t>{0, 2}));  // A, C
  EXPECT_EQ(q.queue(1), (std::vector<std::size_t>{1, 3}));  // B, D
}

TEST(BuildQueues, PriorityNotListOrderDecidesWhoClaimsFirst) {
  const std::vector<QueueSpec> specs{spec("click", ScoreTerm::kCtr, 1, 1),
                                     spec("pay", ScoreTerm::kPrice, 1, 0)};
  const CandidateQueues q = build_queues(four_items(), specs, PartitionStrategy::kDfs, 2);
  EXPECT_EQ(q.queue(1), (std::vector<std::size_t>{1, 0}));  // pay claims B, A
  EXPECT_EQ(q.queue(0), (std::vector<std::size_t>{2, 3}));
}

TEST(BuildQueues, SingleQueueIsTopByScore) {
  std::mt19937_64 rng(1);
  const auto pool = testing::random_pool(rng, 20, 3);
  const std::vector<QueueSpec> specs{spec("c", ScoreTerm::kCtr, 1, 0)};
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return pool[a].prior_ctr > pool[b].prior_ctr;
  });
  order.resize(6);
  for (auto s : {PartitionStrategy::kDfs, PartitionStrategy::kBfs}) {
    EXPECT_EQ(build_queues(pool, specs, s, 6).queue(0), order);
  }
}

TEST(BuildQueues, SharedRankingAllocatesTheSameItems) {
  // Every queue ranks by ctr with wide gaps. Both strategies then hand out
  // exactly the global top q*capacity items. The per-queue split only
  // coincides at capacity 1, since BFS alternates while DFS fills in turn.
  std::vector<Item> pool;
  for (int k = 0; k < 10; ++k) pool.push_back(make_item(k + 1, {1.0}, 1, 0.9 - 0.08 * k, 0.1));
  const std::vector<QueueSpec> specs{spec("a", ScoreTerm::kCtr, 1, 0),
                                     spec("b", ScoreTerm::kCtr, 2, 1),
                                     spec("c", ScoreTerm::kCtrCvr, 1, 2)};
  for (std::size_t cap : {1u, 2u, 3u}) {
    const auto dfs = build_queues(pool, specs, PartitionStrategy::kDfs, cap);
    const auto bfs = build_queues(pool, specs, PartitionStrategy::kBfs, cap);
    std::set<std::size_t> a, b;
    for (const auto& q : dfs.queues()) a.insert(q.begin(), q.end());
    for (const auto& q : bfs.queues()) b.insert(q.begin(), q.end());
    EXPECT_EQ(a, b);
    if (cap == 1) EXPECT_EQ(dfs.queues(), bfs.queues());
  }
}

TEST(BuildQueues, PartitionInvariants) {
  std::mt19937_64 rng(2);
  const auto specs = EngineConfig::default_queue_specs();
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + trial % 25, cap = 1 + trial % 7;
    const auto pool = testing::random_pool(rng, n, 3);
    const auto strategy = trial % 2 ? PartitionStrategy::kDfs : PartitionStrategy::kBfs;
    const CandidateQueues q = build_queues(pool, specs, strategy, cap);
    std::set<std::size_t> seen;
    std::size_t total = 0;
    for (std::size_t k = 0; k < q.num_queues(); ++k) {
      const auto& items = q.queue(k);
      EXPECT_LE(items.size(), cap);
      total += items.size();
      seen.insert(items.begin(), items.end());
      for (std::size_t i = 1; i < items.size(); ++i) {
        const double prev = composite_score(pool[items[i - 1]], specs[k]);
        const double cur = composite_score(pool[items[i]], specs[k]);
        EXPECT_TRUE(prev > cur || (prev == cur && pool[items[i - 1]].id < pool[items[i]].id));
      }
    }
    EXPECT_EQ(seen.size(), total);  // disjoint
    EXPECT_LE(total, n);
    EXPECT_EQ(total, std::min(n, cap * specs.size()));
  }
}

TEST(BuildQueues, ErrorsAndTies) {
  const auto specs = EngineConfig::default_queue_specs();
  EXPECT_THROW(build_queues({}, specs, PartitionStrategy::kDfs, 3), Error);
  auto dup = specs;
  dup[1].priority = dup[0].priority;
  EXPECT_THROW(build_queues(four_items(), dup, PartitionStrategy::kDfs, 3), Error);
  const std::vector<Item> tied{make_item(9, {1.0}, 1, 0.5, 0.1),
                               make_item(3, {1.0}, 1, 0.5, 0.1)};
  const std::vector<QueueSpec> one{spec("c", ScoreTerm::kCtr, 1, 0)};
  EXPECT_EQ(build_queues(tied, one, PartitionStrategy::kDfs, 2).queue(0),
            (std::vector<std::size_t>{1, 0}));
}

TEST(CandidateQueues, SelectionAdvancesCursors) {
  CandidateQueues q({{0, 1, 2}, {3, 4}}, 5);
  EXPECT_EQ(q.head(0), 0u);
  q.select(0);
  EXPECT_EQ(q.head(0), 1u);
  q.select(1);  // guard: head consumed through another path is skipped
  EXPECT_EQ(q.head(0), 2u);
  EXPECT_TRUE(q.is_selected(1));
  q.select(2);
  EXPECT_EQ(q.head(0), std::nullopt);
  EXPECT_FALSE(q.exhausted());
  q.select(3);
  q.select(4);
  EXPECT_TRUE(q.exhausted());
}

TEST(Similarity, Examples) {
  const Item a = make_item(1, {1.0, 0.0}, 1, 0.1, 0.1);
  const Item b = make_item(2, {std::sqrt(0.5), std::sqrt(0.5)}, 1, 0.1, 0.1);
  const Item c = make_item(3, {0.0, 1.0}, 1, 0.1, 0.1);
  EXPECT_NEAR(similarity(a, b), 0.7071, 1e-4);
  EXPECT_EQ(similarity(a, a), 1.0);
  EXPECT_EQ(similarity(a, c), 0.0);
}

TEST(Mmr, Examples) {
  const std::vector<Item> pool{make_item(1, {1.0, 0.0}, 1, 0.1, 0.1),
                               make_item(2, {0.5, std::sqrt(0.75)}, 1, 0.1, 0.1),
                               make_item(3, {0.0, 1.0}, 1, 0.1, 0.1)};
  SubList prefix;
  prefix.items = {1};
  prefix.source_queues = {0};
  EXPECT_NEAR(max_window_similarity(pool[0], pool, prefix, 5), 0.5, 1e-15);
  EXPECT_NEAR(mmr_score(pool[0], pool, prefix, 5, 0.8, 2.0), 1.5, 1e-12);
  EXPECT_EQ(mmr_score(pool[0], pool, prefix, 5, 1.0, 2.0), 2.0);
  EXPECT_NEAR(mmr_score(pool[0], pool, prefix, 5, 0.0, 2.0), -0.5, 1e-15);
  EXPECT_EQ(mmr_score(pool[0], pool, SubList{}, 5, 0.5, 2.0), 1.0);
  // Only the last `window` prefix items count.
  prefix.items = {0, 2};
  prefix.source_queues = {0, 0};
  EXPECT_EQ(max_window_similarity(pool[0], pool, prefix, 1), 0.0);
  EXPECT_EQ(max_window_similarity(pool[0], pool, prefix, 2), 1.0);
}

TEST(Generate, SingleQueuePureValueReturnsQueueOrder) {
  EngineConfig c = testing::small_config();
  c.queue_specs = {spec("c", ScoreTerm::kCtr, 1, 0)};
  c.lambda_mmr = 1.0;
  std::mt19937_64 rng(3);
  const SortModel m = jittered_model(c, 3);
  const auto pool = testing::random_pool(rng, c.l_s, c.d_emb);
  const CandidateQueues q = build_queues(pool, c.queue_specs, c.partition_strategy, c.l_o);
  const GenerationTrace t =
      generate(pool, testing::random_user(rng, c.d_user), q, m, GenerationParams::from(c));
  EXPECT_EQ(t.result.items, q.queue(0));
  EXPECT_EQ(t.result.source_queues, std::vector<int>(c.l_o, 0));
}

TEST(Generate, ZeroLambdaPicksLeastSimilarHead) {
  EngineConfig c = testing::small_config();
  c.lambda_mmr = 0.0;
  std::mt19937_64 rng(4);
  const SortModel m = jittered_model(c, 4);
  for (int trial = 0; trial < 50; ++trial) {
    const auto pool = testing::random_pool(rng, c.l_s, c.d_emb);
    const CandidateQueues q = build_queues(pool, c.queue_specs, c.partition_strategy, c.l_o);
    const GenerationTrace t =
        generate(pool, testing::random_user(rng, c.d_user), q, m, GenerationParams::from(c));
    SubList prefix;
    for (const StepRecord& step : t.steps) {
      double least = 2.0;
      for (const auto& cand : step.candidates) {
        least = std::min(least, max_window_similarity(pool[cand.pool_index], pool, prefix,
                                                      c.window_w));
      }
      EXPECT_EQ(max_window_similarity(pool[step.chosen_pool_index], pool, prefix, c.window_w),
                least);
      prefix.items.push_back(step.chosen_pool_index);
      prefix.source_queues.push_back(step.chosen_queue);
    }
  }
}

struct Instance {
  EngineConfig config;
  std::vector<Item> pool;
  UserContext user;
};

Instance random_instance(std::mt19937_64& rng, int trial) {
  Instance in;
  in.config = testing::small_config();
  const auto all = EngineConfig::default_queue_specs();
  in.config.queue_specs.assign(all.begin(), all.begin() + 1 + trial % 3);
  in.config.partition_strategy = (trial / 3) % 2 ? PartitionStrategy::kDfs
                                                 : PartitionStrategy::kBfs;
  in.config.lambda_mmr = std::array{1.0, 0.8, 0.5}[(trial / 6) % 3];
  in.pool = testing::random_pool(rng, in.config.l_s, in.config.d_emb);
  in.user = testing::random_user(rng, in.config.d_user);
  return in;
}

TEST(Generate, MatchesIterativeReferenceExactly) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 180; ++trial) {
    const Instance in = random_instance(rng, trial);
    const SortModel m = jittered_model(in.config, trial);
    const CandidateQueues q =
        build_queues(in.pool, in.config.queue_specs, in.config.partition_strategy, in.config.l_o);
    const GenerationParams params = GenerationParams::from(in.config);
    const GenerationTrace fast = generate(in.pool, in.user, q, m, params);
    const GenerationTrace slow = generate_iterative_reference(in.pool, in.user, q, m, params);
    ASSERT_EQ(fast.result, slow.result) << "trial " << trial;
    EXPECT_EQ(fast.ids, slow.ids);
    EXPECT_EQ(fast.value.combined, slow.value.combined);
    ASSERT_EQ(fast.steps.size(), slow.steps.size());
    for (std::size_t s = 0; s < fast.steps.size(); ++s) {
      ASSERT_EQ(fast.steps[s].candidates.size(), slow.steps[s].candidates.size());
      for (std::size_t k = 0; k < fast.steps[s].candidates.size(); ++k) {
        EXPECT_EQ(fast.steps[s].candidates[k].mmr, slow.steps[s].candidates[k].mmr);
      }
    }
  }
}

TEST(Generate, InvocationBudget) {
  EngineConfig c = testing::small_config(15, 5);
  std::mt19937_64 rng(6);
  const SortModel m = jittered_model(c, 6);
  const auto all = EngineConfig::default_queue_specs();
  for (std::size_t q = 1; q <= 3; ++q) {
    c.queue_specs.assign(all.begin(), all.begin() + q);
    for (int trial = 0; trial < 10; ++trial) {
      const auto pool = testing::random_pool(rng, c.l_s, c.d_emb);
      const UserContext user = testing::random_user(rng, c.d_user);
      const CandidateQueues queues = build_queues(pool, c.queue_specs, c.partition_strategy, c.l_o);
      const auto params = GenerationParams::from(c);
      EXPECT_LE(generate(pool, user, queues, m, params).forward_invocations, c.l_o);
      EXPECT_EQ(generate_iterative_reference(pool, user, queues, m, params).forward_invocations,
                q * c.l_o);
    }
  }
}

TEST(Generate, SimulatedOverheadIsChargedPerCall) {
  EngineConfig c = testing::small_config(15, 5);
  std::mt19937_64 rng(7);
  const SortModel m = jittered_model(c, 7);
  const auto pool = testing::random_pool(rng, c.l_s, c.d_emb);
  const UserContext user = testing::random_user(rng, c.d_user);
  const CandidateQueues q = build_queues(pool, c.queue_specs, c.partition_strategy, c.l_o);
  const auto overhead = std::chrono::microseconds(200);
  const auto fast = generate(pool, user, q, m, GenerationParams::from(c), overhead);
  const auto slow = generate_iterative_reference(pool, user, q, m, GenerationParams::from(c), overhead);
  EXPECT_EQ(fast.simulated_overhead, overhead * fast.forward_invocations);
  EXPECT_EQ(slow.simulated_overhead, overhead * 15);
  EXPECT_GE(slow.wall_ns, 15u * 200'000u);
}

TEST(Generate, NeverRepeatsAnItem) {
  std::mt19937_64 rng(8);
  const EngineConfig base = testing::small_config();
  const SortModel m = jittered_model(base, 8, 1.0);
  for (int trial = 0; trial < 10000; ++trial) {
    EngineConfig c = base;
    c.lambda_mmr = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    c.partition_strategy = trial % 2 ? PartitionStrategy::kDfs : PartitionStrategy::kBfs;
    auto pool = testing::random_pool(rng, c.l_s, c.d_emb);
    if (trial % 5 == 0) {
      for (std::size_t k = 1; k < pool.size(); ++k) pool[k].embedding = pool[0].embedding;
    }
    const CandidateQueues q = build_queues(pool, c.queue_specs, c.partition_strategy, c.l_o);
    const auto t = generate(pool, testing::random_user(rng, c.d_user), q, m,
                            GenerationParams::from(c));
    ASSERT_EQ(t.ids.size(), c.l_o);
    EXPECT_EQ(std::set<ItemId>(t.ids.begin(), t.ids.end()).size(), c.l_o);
    EXPECT_NO_THROW(validate_sublist(t.result, pool, c.l_o));
  }
}

TEST(Generate, InfeasibleQueuesAreReported) {
  EngineConfig c = testing::small_config(12, 5);
  c.queue_specs = {spec("c", ScoreTerm::kCtr, 1, 0)};
  std::mt19937_64 rng(9);
  const SortModel m = SortModel::initialize(c, 9);
  const auto pool = testing::random_pool(rng, c.l_s, c.d_emb);
  const CandidateQueues q = build_queues(pool, c.queue_specs, c.partition_strategy, 3);
  EXPECT_THROW(generate(pool, testing::random_user(rng, c.d_user), q, m, GenerationParams::from(c)),
               Error);
}

TEST(Generate, ReportedValueIsTheListValue) {
  const EngineConfig c = testing::small_config();
  std::mt19937_64 rng(10);
  const SortModel m = jittered_model(c, 10);
  const auto pool = testing::random_pool(rng, c.l_s, c.d_emb);
  const UserContext user = testing::random_user(rng, c.d_user);
  const CandidateQueues q = build_queues(pool, c.queue_specs, c.partition_strategy, c.l_o);
  const auto t = generate(pool, user, q, m, GenerationParams::from(c));
  EXPECT_EQ(t.value.combined, model_list_value(m, pool, user, t.result, c.weights).combined);
}

TEST(Oracle, CountsArrangements) {
  EXPECT_EQ(arrangements(3, 2), 6u);
  EXPECT_EQ(arrangements(8, 4), 1680u);
  EXPECT_EQ(arrangements(5, 0), 1u);
  EngineConfig c = testing::small_config(3, 2);
  c.max_count = 2;
  std::mt19937_64 rng(11);
  const SortModel m = jittered_model(c, 11);
  const auto pool = testing::random_pool(rng, 3, c.d_emb);
  const auto r = exhaustive_oracle(pool, testing::random_user(rng, c.d_user), m, c.weights, 2);
  EXPECT_EQ(r.evaluated, 6u);
  EXPECT_THROW(exhaustive_oracle(pool, testing::random_user(rng, c.d_user), m, c.weights, 2, 5),
               Error);
}

TEST(Oracle, SingleItem) {
  EngineConfig c = testing::small_config(1, 1);
  c.max_count = 1;
  std::mt19937_64 rng(12);
  const SortModel m = jittered_model(c, 12);
  const auto pool = testing::random_pool(rng, 1, c.d_emb);
  const UserContext user = testing::random_user(rng, c.d_user);
  const auto r = exhaustive_oracle(pool, user, m, c.weights, 1);
  EXPECT_EQ(r.ids, std::vector<ItemId>{pool[0].id});
  SubList only;
  only.items = {0};
  only.source_queues = {0};
  EXPECT_EQ(r.value.combined, model_list_value(m, pool, user, only, c.weights).combined);
}

// Uniformly random ordered selection of `length` pool items, the space the
// exhaustive oracle searches.
SubList random_arrangement(std::mt19937_64& rng, std::size_t pool_size, std::size_t length) {
  std::vector<std::size_t> order(pool_size);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  SubList s;
  s.items.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(length));
  s.source_queues.assign(length, 0);
  return s;
}

TEST(Oracle, GreedyDominance) {
  EngineConfig c = testing::small_config(8, 4);
  c.max_count = 4;
  c.lambda_mmr = 1.0;
  std::mt19937_64 rng(13);
  std::size_t greedy_beats_random = 0;
  double greedy_sum = 0.0;
  double random_sum = 0.0;
  const int instances = 40;
  for (int trial = 0; trial < instances; ++trial) {
    const SortModel m = jittered_model(c, 200 + trial, 0.5);
    const auto pool = testing::random_pool(rng, c.l_s, c.d_emb);
    const UserContext user = testing::random_user(rng, c.d_user);
    const CandidateQueues q = build_queues(pool, c.queue_specs, c.partition_strategy, c.l_o);
    const auto greedy = generate(pool, user, q, m, GenerationParams::from(c));
    const auto best = exhaustive_oracle(pool, user, m, c.weights, c.l_o);
    EXPECT_GE(best.value.combined, greedy.value.combined) << "trial " << trial;
    double random_mean = 0.0;
    for (int r = 0; r < 100; ++r) {
      random_mean += model_list_value(m, pool, user, random_arrangement(rng, pool.size(), c.l_o),
                                      c.weights).combined;
    }
    random_mean /= 100.0;
    greedy_beats_random += greedy.value.combined >= random_mean;
    greedy_sum += greedy.value.combined;
    random_sum += random_mean;
  }
  // Greedy is myopic, so an arbitrary model can lure its first pick into a
  // poor list (seed 13 has one such instance). Beating the random mean is
  // checked on aggregate and on nearly every instance, not on all of them.
  EXPECT_GT(greedy_sum, random_sum);
  EXPECT_GE(greedy_beats_random, static_cast<std::size_t>(instances * 9 / 10));
}

TEST(Generate, LowerLambdaDiversifies) {
  const EngineConfig base = testing::small_config(12, 5);
  const SortModel m = jittered_model(base, 14);
  std::mt19937_64 rng(14);
  std::vector<Pool> pools;
  for (int k = 0; k < 500; ++k) {
    pools.push_back({testing::random_user(rng, base.d_user),
                     testing::random_pool(rng, base.l_s, base.d_emb)});
  }
  std::vector<DiversityStats> stats;
  for (double lambda : {1.0, 0.8, 0.5}) {
    GenerationParams p = GenerationParams::from(base);
    p.lambda = lambda;
    stats.push_back(diversity_stats(pools, m, p));
  }
  EXPECT_GE(stats[0].mean_window_similarity, stats[1].mean_window_similarity);
  EXPECT_GE(stats[1].mean_window_similarity, stats[2].mean_window_similarity);
  EXPECT_GE(stats[1].mean_distinct_categories, stats[0].mean_distinct_categories);
}

TEST(Template, FollowsPatternWithFallThrough) {
  const CandidateQueues q({{0, 1}, {2}, {3, 4, 5}}, 6);
  const std::vector<Item> pool = [] {
    std::vector<Item> p;
    for (int k = 0; k < 6; ++k) p.push_back(make_item(k + 10, {1.0}, 1, 0.1, 0.1));
    return p;
  }();
  const std::vector<int> pattern{0, 1, 1, 2};
  const auto t = generate_template(pool, q, pattern, 6);
  EXPECT_EQ(t.result.items, (std::vector<std::size_t>{0, 2, 3, 4, 1, 5}));
  EXPECT_EQ(t.result.source_queues, (std::vector<int>{0, 1, 2, 2, 0, 2}));
  EXPECT_EQ(t.forward_invocations, 0u);
}

TEST(Baselines, PriorScoreOrderAndRankingTopQueue) {
  std::vector<Item> pool{make_item(5, {1.0}, 1, 0.3, 0.1), make_item(2, {1.0}, 1, 0.3, 0.1),
                         make_item(7, {1.0}, 1, 0.6, 0.1)};
  EXPECT_EQ(prior_score_order(pool, 2).items, (std::vector<std::size_t>{2, 1}));
  const QueueSpec q = ranking_top_queue_spec({5, 1, 1});
  EXPECT_NEAR(composite_score(pool[2], q), 5 * 0.6 + 0.06 + 0.06, 1e-12);
}

TEST(Trace, RecordCarriesTheSlate) {
  const EngineConfig c = testing::small_config();
  std::mt19937_64 rng(15);
  const SortModel m = jittered_model(c, 15);
  const auto pool = testing::random_pool(rng, c.l_s, c.d_emb);
  const CandidateQueues q = build_queues(pool, c.queue_specs, c.partition_strategy, c.l_o);
  const auto t = generate(pool, testing::random_user(rng, c.d_user), q, m, GenerationParams::from(c));
  const std::string line = trace_record(t);
  EXPECT_EQ(line.find('\n'), std::string::npos);  // one line; callers add the newline
  for (const char* key : {"\"ids\"", "\"source_queues\"", "\"steps\"",
                          "\"forward_invocations\"", "\"wall_ns\""}) {
    EXPECT_NE(line.find(key), std::string::npos) << key;
  }
}

}  // namespace
}  // namespace sortgen
