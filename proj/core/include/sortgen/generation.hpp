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

#ifndef SORTGEN_GENERATION_HPP_
#define SORTGEN_GENERATION_HPP_

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sortgen/config.hpp"
#include "sortgen/listvalue.hpp"
#include "sortgen/model.hpp"
#include "sortgen/queues.hpp"
#include "sortgen/types.hpp"

namespace sortgen {

/// Cosine similarity of unit-norm embeddings.
double similarity(const Item& a, const Item& b);

/// Largest similarity between `candidate` and the last min(window, |prefix|)
/// prefix items; 0 for an empty prefix.
double max_window_similarity(const Item& candidate, std::span<const Item> pool,
                             const SubList& prefix, std::size_t window);

/// lambda * value - (1 - lambda) * max_window_similarity.
double mmr_score(const Item& candidate, std::span<const Item> pool,
                 const SubList& prefix, std::size_t window, double lambda,
                 double value_with_candidate);

struct GenerationParams {
  std::size_t list_length = 10;
  ObjectiveWeights weights{};
  double lambda = 0.8;
  std::size_t window = 5;

  static GenerationParams from(const EngineConfig& config);
};

struct CandidateRecord {
  int queue = 0;
  std::size_t pool_index = 0;
  ItemId id = 0;
  ListValue value;
  double mmr = 0.0;
};

struct StepRecord {
  std::vector<CandidateRecord> candidates;
  int chosen_queue = 0;
  std::size_t chosen_pool_index = 0;
};

struct GenerationTrace {
  SubList result;
  std::vector<ItemId> ids;
  std::vector<StepRecord> steps;
  ListValue value;  // of the full result
  std::size_t forward_invocations = 0;
  std::chrono::nanoseconds simulated_overhead{0};
  std::uint64_t wall_ns = 0;
};

/// Greedy slate construction with one batched model evaluation per step.
///
/// At each step the head of every non-empty queue is appended to the shared
/// prefix; all expansions are scored together against the cached prefix
/// state, each gets the weighted list value of the expanded list, and the
/// best MMR score wins (ties to the lower queue index). The chosen item is
/// committed to the cache and the queue masks advance.
GenerationTrace generate(std::span<const Item> pool, const UserContext& user,
                         CandidateQueues queues, const SortModel& model,
                         const GenerationParams& params,
                         std::chrono::nanoseconds per_call_overhead = {});

/// The same selection rule, but every candidate of every step is scored by
/// its own full model call on prefix + candidate, each call paying
/// `per_call_overhead` of busy-waiting.
GenerationTrace generate_iterative_reference(
    std::span<const Item> pool, const UserContext& user, CandidateQueues queues,
    const SortModel& model, const GenerationParams& params,
    std::chrono::nanoseconds per_call_overhead = {});

/// Rule-based interleaving: step t draws the head of queue
/// pattern[t % |pattern|] (mod the queue count), falling through to the next
/// non-empty queue. No model is consulted.
GenerationTrace generate_template(std::span<const Item> pool, CandidateQueues queues,
                                  std::span<const int> pattern,
                                  std::size_t list_length);

/// The pointwise score alpha*ctr + beta*ctr*cvr + gamma*ctr*cvr*price as a
/// single queue.
QueueSpec ranking_top_queue_spec(const ObjectiveWeights& weights);

/// The upstream ranking order: the first `length` items by prior_ctr.
SubList prior_score_order(std::span<const Item> pool, std::size_t length);

/// Model value of an arbitrary list (one full model call).
ListValue model_list_value(const SortModel& model, std::span<const Item> pool,
                           const UserContext& user, const SubList& list,
                           const ObjectiveWeights& weights);

/// Number of ordered selections of k out of n, saturating at UINT64_MAX.
std::uint64_t arrangements(std::size_t n, std::size_t k);

inline constexpr std::uint64_t kOracleLimit = 1'000'000;

struct OracleResult {
  SubList best;
  std::vector<ItemId> ids;
  ListValue value;
  std::uint64_t evaluated = 0;
};

/// Scores every ordered selection of `length` pool items and returns the
/// best (ties to the lexicographically smallest id sequence). Refuses pools
/// with more than `limit` arrangements.
OracleResult exhaustive_oracle(std::span<const Item> pool, const UserContext& user,
                               const SortModel& model, const ObjectiveWeights& weights,
                               std::size_t length, std::uint64_t limit = kOracleLimit);

}  // namespace sortgen

#endif  // SORTGEN_GENERATION_HPP_
