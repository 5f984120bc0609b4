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

#ifndef SORTGEN_QUEUES_HPP_
#define SORTGEN_QUEUES_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "sortgen/config.hpp"
#include "sortgen/types.hpp"

namespace sortgen {

double composite_score(const Item& item, const QueueSpec& spec);

/// Disjoint objective-ordered queues over a candidate pool, plus the masks
/// that track consumption during generation. Queue k follows queue_specs[k].
class CandidateQueues {
 public:
  CandidateQueues() = default;
  CandidateQueues(std::vector<std::vector<std::size_t>> queues, std::size_t pool_size);

  std::size_t num_queues() const { return queues_.size(); }
  const std::vector<std::size_t>& queue(std::size_t k) const { return queues_.at(k); }
  const std::vector<std::vector<std::size_t>>& queues() const { return queues_; }
  std::size_t cursor(std::size_t k) const { return cursor_.at(k); }
  bool is_selected(std::size_t pool_index) const { return selected_.at(pool_index); }

  /// Next unconsumed, unselected pool index of queue k.
  std::optional<std::size_t> head(std::size_t k) const;
  bool exhausted() const;

  /// Marks a pool item selected and moves every cursor past selected items.
  void select(std::size_t pool_index);

 private:
  void skip_selected(std::size_t k);

  std::vector<std::vector<std::size_t>> queues_;
  std::vector<std::size_t> cursor_;
  std::vector<bool> selected_;
};

/// Partitions the pool into queues of at most `capacity` items.
///
/// DFS: in priority order each queue takes its top-`capacity` unassigned items.
/// BFS: round by round, in priority order, each non-full queue takes its single
/// best unassigned item. Ties in score go to the lower item id.
CandidateQueues build_queues(std::span<const Item> pool,
                             std::span<const QueueSpec> specs,
                             PartitionStrategy strategy, std::size_t capacity);

}  // namespace sortgen

#endif  // SORTGEN_QUEUES_HPP_
