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

#include "sortgen/generation.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

namespace sortgen {
namespace {

using Clock = std::chrono::steady_clock;

void spin_for(std::chrono::nanoseconds d) {
  if (d.count() <= 0) return;
  const auto until = Clock::now() + d;
  while (Clock::now() < until) {
  }
}

void check_inputs(std::span<const Item> pool, const CandidateQueues& queues,
                  const GenerationParams& params) {
  if (pool.empty()) throw ConfigError("generate: empty candidate pool");
  if (params.list_length == 0) throw ConfigError("generate: list length must be positive");
  if (params.window == 0) throw ConfigError("generate: window must be at least 1");
  if (!(params.lambda >= 0.0 && params.lambda <= 1.0)) {
    throw ConfigError("generate: lambda outside [0,1]");
  }
  validate_weights(params.weights);
  for (const auto& q : queues.queues()) {
    for (std::size_t index : q) {
      if (index >= pool.size()) throw ShapeError("generate: queue index outside the pool");
    }
  }
}

[[noreturn]] void infeasible(std::size_t picked, std::size_t wanted) {
  throw ConfigError("generate: all queues exhausted after " + std::to_string(picked) +
                    " of " + std::to_string(wanted) +
                    " picks; queue capacities cannot fill the list");
}

std::vector<double> prices_of(std::span<const Item> pool, const SubList& list) {
  std::vector<double> prices;
  prices.reserve(list.size() + 1);
  for (std::size_t index : list.items) prices.push_back(pool[index].price);
  return prices;
}

// Picks the best candidate; candidates are in ascending queue order so a
// strict comparison leaves ties with the lower queue index.
std::size_t argmax_mmr(const std::vector<CandidateRecord>& candidates) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < candidates.size(); ++c) {
    const auto& a = candidates[c];
    const auto& b = candidates[best];
    if (a.mmr > b.mmr || (a.mmr == b.mmr && a.queue == b.queue && a.id < b.id)) {
      best = c;
    }
  }
  return best;
}

void finish(GenerationTrace& trace, std::span<const Item> pool, Clock::time_point t0) {
  trace.ids.clear();
  for (std::size_t index : trace.result.items) trace.ids.push_back(pool[index].id);
  trace.wall_ns = static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - t0).count());
}

}  // namespace

double similarity(const Item& a, const Item& b) { return dot(a.embedding, b.embedding); }

double max_window_similarity(const Item& candidate, std::span<const Item> pool,
                             const SubList& prefix, std::size_t window) {
  const std::size_t n = prefix.size();
  if (n == 0 || window == 0) return 0.0;
  const std::size_t from = n > window ? n - window : 0;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t t = from; t < n; ++t) {
    best = std::max(best, similarity(candidate, pool[prefix.items[t]]));
  }
  return best;
}

double mmr_score(const Item& candidate, std::span<const Item> pool,
                 const SubList& prefix, std::size_t window, double lambda,
                 double value_with_candidate) {
  return lambda * value_with_candidate -
         (1.0 - lambda) * max_window_similarity(candidate, pool, prefix, window);
}

GenerationParams GenerationParams::from(const EngineConfig& c) {
  return GenerationParams{c.l_o, c.weights, c.lambda_mmr, c.window_w};
}

GenerationTrace generate(std::span<const Item> pool, const UserContext& user,
                         CandidateQueues queues, const SortModel& model,
                         const GenerationParams& params,
                         std::chrono::nanoseconds per_call_overhead) {
  const auto t0 = Clock::now();
  check_inputs(pool, queues, params);
  GenerationTrace trace;
  PrefixState prefix = model.start();
  std::vector<double> prices;
  std::vector<StepResult> scored;

  for (std::size_t t = 0; t < params.list_length; ++t) {
    StepRecord record;
    for (std::size_t k = 0; k < queues.num_queues(); ++k) {
      if (auto h = queues.head(k)) {
        record.candidates.push_back(
            CandidateRecord{static_cast<int>(k), *h, pool[*h].id, {}, 0.0});
      }
    }
    if (record.candidates.empty()) infeasible(t, params.list_length);

    // One batched evaluation of every expansion against the cached prefix.
    spin_for(per_call_overhead);
    trace.simulated_overhead += per_call_overhead;
    ++trace.forward_invocations;
    scored.clear();
    for (const auto& cand : record.candidates) {
      scored.push_back(model.step(prefix, user, pool[cand.pool_index]));
    }

    prices = prices_of(pool, trace.result);
    prices.push_back(0.0);
    for (std::size_t c = 0; c < record.candidates.size(); ++c) {
      auto& cand = record.candidates[c];
      SurvivalMatrix click = prefix.click;
      SurvivalMatrix pay = prefix.pay;
      click.push_row(scored[c].click_probs);
      pay.push_row(scored[c].pay_probs);
      prices.back() = pool[cand.pool_index].price;
      cand.value = list_value(click, pay, prices, params.weights);
      cand.mmr = mmr_score(pool[cand.pool_index], pool, trace.result, params.window,
                           params.lambda, cand.value.combined);
    }

    const std::size_t best = argmax_mmr(record.candidates);
    const auto& chosen = record.candidates[best];
    record.chosen_queue = chosen.queue;
    record.chosen_pool_index = chosen.pool_index;
    model.commit(prefix, scored[best]);
    queues.select(chosen.pool_index);
    trace.result.items.push_back(chosen.pool_index);
    trace.result.source_queues.push_back(chosen.queue);
    trace.value = chosen.value;
    trace.steps.push_back(std::move(record));
  }
  finish(trace, pool, t0);
  return trace;
}

GenerationTrace generate_iterative_reference(
    std::span<const Item> pool, const UserContext& user, CandidateQueues queues,
    const SortModel& model, const GenerationParams& params,
    std::chrono::nanoseconds per_call_overhead) {
  const auto t0 = Clock::now();
  check_inputs(pool, queues, params);
  GenerationTrace trace;

  for (std::size_t t = 0; t < params.list_length; ++t) {
    StepRecord record;
    for (std::size_t k = 0; k < queues.num_queues(); ++k) {
      if (auto h = queues.head(k)) {
        record.candidates.push_back(
            CandidateRecord{static_cast<int>(k), *h, pool[*h].id, {}, 0.0});
      }
    }
    if (record.candidates.empty()) infeasible(t, params.list_length);

    for (auto& cand : record.candidates) {
      SubList expanded = trace.result;
      expanded.items.push_back(cand.pool_index);
      expanded.source_queues.push_back(cand.queue);
      spin_for(per_call_overhead);
      trace.simulated_overhead += per_call_overhead;
      ++trace.forward_invocations;
      cand.value = model_list_value(model, pool, user, expanded, params.weights);
      cand.mmr = mmr_score(pool[cand.pool_index], pool, trace.result, params.window,
                           params.lambda, cand.value.combined);
    }

    const std::size_t best = argmax_mmr(record.candidates);
    const auto& chosen = record.candidates[best];
    record.chosen_queue = chosen.queue;
    record.chosen_pool_index = chosen.pool_index;
    queues.select(chosen.pool_index);
    trace.result.items.push_back(chosen.pool_index);
    trace.result.source_queues.push_back(chosen.queue);
    trace.value = chosen.value;
    trace.steps.push_back(std::move(record));
  }
  finish(trace, pool, t0);
  return trace;
}

GenerationTrace generate_template(std::span<const Item> pool, CandidateQueues queues,
                                  std::span<const int> pattern,
                                  std::size_t list_length) {
  const auto t0 = Clock::now();
  if (pattern.empty()) throw ConfigError("template: empty queue pattern");
  const std::size_t q = queues.num_queues();
  if (q == 0) throw ConfigError("template: no queues");
  GenerationTrace trace;
  for (std::size_t t = 0; t < list_length; ++t) {
    const std::size_t want = static_cast<std::size_t>(pattern[t % pattern.size()]) % q;
    std::optional<std::size_t> pick;
    std::size_t queue = want;
    for (std::size_t offset = 0; offset < q && !pick; ++offset) {
      queue = (want + offset) % q;
      pick = queues.head(queue);
    }
    if (!pick) infeasible(t, list_length);
    StepRecord record;
    record.candidates.push_back(
        CandidateRecord{static_cast<int>(queue), *pick, pool[*pick].id, {}, 0.0});
    record.chosen_queue = static_cast<int>(queue);
    record.chosen_pool_index = *pick;
    queues.select(*pick);
    trace.result.items.push_back(*pick);
    trace.result.source_queues.push_back(static_cast<int>(queue));
    trace.steps.push_back(std::move(record));
  }
  finish(trace, pool, t0);
  return trace;
}

QueueSpec ranking_top_queue_spec(const ObjectiveWeights& w) {
  QueueSpec spec;
  spec.name = "ranking";
  spec.coefficients[static_cast<std::size_t>(ScoreTerm::kCtr)] = w.alpha;
  spec.coefficients[static_cast<std::size_t>(ScoreTerm::kCtrCvr)] = w.beta;
  spec.coefficients[static_cast<std::size_t>(ScoreTerm::kCtrCvrPrice)] = w.gamma;
  return spec;
}

SubList prior_score_order(std::span<const Item> pool, std::size_t length) {
  if (length > pool.size()) throw ConfigError("prior_score_order: pool too small");
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (pool[a].prior_ctr != pool[b].prior_ctr) return pool[a].prior_ctr > pool[b].prior_ctr;
    return pool[a].id < pool[b].id;
  });
  order.resize(length);
  SubList list;
  list.items = std::move(order);
  list.source_queues.assign(length, 0);
  return list;
}

ListValue model_list_value(const SortModel& model, std::span<const Item> pool,
                           const UserContext& user, const SubList& list,
                           const ObjectiveWeights& weights) {
  ListScores scores = model.predict_one(pool, list, user);
  return list_value(scores.click, scores.pay, list, pool, weights);
}

std::uint64_t arrangements(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < k; ++i) {
    const std::uint64_t f = n - i;
    if (total > std::numeric_limits<std::uint64_t>::max() / f) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    total *= f;
  }
  return total;
}

OracleResult exhaustive_oracle(std::span<const Item> pool, const UserContext& user,
                               const SortModel& model, const ObjectiveWeights& weights,
                               std::size_t length, std::uint64_t limit) {
  validate_weights(weights);
  if (length == 0 || length > pool.size()) {
    throw ConfigError("exhaustive_oracle: list length must be in [1, pool size]");
  }
  if (length > model.config().l_o) {
    throw ConfigError("exhaustive_oracle: list length exceeds the model's l_o");
  }
  const std::uint64_t total = arrangements(pool.size(), length);
  if (total > limit) {
    throw ConfigError("exhaustive_oracle: " + std::to_string(pool.size()) + " choose-ordered " +
                      std::to_string(length) + " has " + std::to_string(total) +
                      " arrangements, above the limit of " + std::to_string(limit));
  }

  OracleResult result;
  bool have_best = false;
  std::vector<bool> used(pool.size(), false);
  SubList current;
  std::vector<double> prices;
  std::vector<ItemId> ids;

  // Depth-first over prefixes so shared prefixes are scored once.
  auto recurse = [&](auto&& self, const PrefixState& prefix) -> void {
    if (current.size() == length) {
      ++result.evaluated;
      ListValue v = list_value(prefix.click, prefix.pay, prices, weights);
      bool better = !have_best || v.combined > result.value.combined;
      if (have_best && v.combined == result.value.combined) better = ids < result.ids;
      if (better) {
        have_best = true;
        result.value = v;
        result.best = current;
        result.ids = ids;
      }
      return;
    }
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (used[i]) continue;
      used[i] = true;
      current.items.push_back(i);
      current.source_queues.push_back(0);
      prices.push_back(pool[i].price);
      ids.push_back(pool[i].id);
      PrefixState next = prefix;
      model.commit(next, model.step(prefix, user, pool[i]));
      self(self, next);
      ids.pop_back();
      prices.pop_back();
      current.source_queues.pop_back();
      current.items.pop_back();
      used[i] = false;
    }
  };
  recurse(recurse, model.start());
  return result;
}

}  // namespace sortgen
