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

#include "sortgen/queues.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <string>

namespace sortgen {

double composite_score(const Item& item, const QueueSpec& spec) {
  const double ctr_cvr = item.prior_ctr * item.prior_cvr;
  return spec.coefficient(ScoreTerm::kCtr) * item.prior_ctr +
         spec.coefficient(ScoreTerm::kCvr) * item.prior_cvr +
         spec.coefficient(ScoreTerm::kCtrCvr) * ctr_cvr +
         spec.coefficient(ScoreTerm::kPrice) * item.price +
         spec.coefficient(ScoreTerm::kCtrCvrPrice) * ctr_cvr * item.price;
}

CandidateQueues::CandidateQueues(std::vector<std::vector<std::size_t>> queues,
                                 std::size_t pool_size)
    : queues_(std::move(queues)),
      cursor_(queues_.size(), 0),
      selected_(pool_size, false) {
  std::vector<bool> seen(pool_size, false);
  for (const auto& q : queues_) {
    for (std::size_t index : q) {
      if (index >= pool_size) throw ShapeError("queue index outside the pool");
      if (seen[index]) {
        throw ShapeError("pool item " + std::to_string(index) +
                         " appears in more than one queue");
      }
      seen[index] = true;
    }
  }
}

std::optional<std::size_t> CandidateQueues::head(std::size_t k) const {
  const auto& q = queues_.at(k);
  for (std::size_t c = cursor_[k]; c < q.size(); ++c) {
    if (!selected_[q[c]]) return q[c];
  }
  return std::nullopt;
}

bool CandidateQueues::exhausted() const {
  for (std::size_t k = 0; k < queues_.size(); ++k) {
    if (head(k)) return false;
  }
  return true;
}

void CandidateQueues::skip_selected(std::size_t k) {
  const auto& q = queues_[k];
  while (cursor_[k] < q.size() && selected_[q[cursor_[k]]]) ++cursor_[k];
}

void CandidateQueues::select(std::size_t pool_index) {
  if (pool_index >= selected_.size()) throw ShapeError("select: index outside the pool");
  if (selected_[pool_index]) {
    throw Error("select: pool item " + std::to_string(pool_index) + " already selected");
  }
  selected_[pool_index] = true;
  for (std::size_t k = 0; k < queues_.size(); ++k) skip_selected(k);
}

CandidateQueues build_queues(std::span<const Item> pool,
                             std::span<const QueueSpec> specs,
                             PartitionStrategy strategy, std::size_t capacity) {
  if (pool.empty()) throw ConfigError("build_queues: empty candidate pool");
  if (specs.empty()) throw ConfigError("build_queues: no queue specs");
  std::set<int> priorities;
  for (const auto& s : specs) {
    if (!priorities.insert(s.priority).second) {
      throw ConfigError("build_queues: duplicate queue priority " +
                        std::to_string(s.priority));
    }
  }
  std::vector<std::size_t> order(specs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return specs[a].priority < specs[b].priority;
  });

  // Every queue's full ranking of the pool.
  std::vector<std::vector<std::size_t>> rankings(specs.size());
  for (std::size_t k = 0; k < specs.size(); ++k) {
    std::vector<double> score(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) score[i] = composite_score(pool[i], specs[k]);
    auto& r = rankings[k];
    r.resize(pool.size());
    std::iota(r.begin(), r.end(), std::size_t{0});
    std::sort(r.begin(), r.end(), [&](std::size_t a, std::size_t b) {
      if (score[a] != score[b]) return score[a] > score[b];
      return pool[a].id < pool[b].id;
    });
  }

  std::vector<std::vector<std::size_t>> queues(specs.size());
  std::vector<bool> assigned(pool.size(), false);
  std::vector<std::size_t> scan(specs.size(), 0);
  auto take_best = [&](std::size_t k) {
    auto& r = rankings[k];
    while (scan[k] < r.size() && assigned[r[scan[k]]]) ++scan[k];
    if (scan[k] == r.size()) return false;
    assigned[r[scan[k]]] = true;
    queues[k].push_back(r[scan[k]]);
    return true;
  };

  if (strategy == PartitionStrategy::kDfs) {
    for (std::size_t k : order) {
      while (queues[k].size() < capacity && take_best(k)) {
      }
    }
  } else {
    bool progress = true;
    while (progress) {
      progress = false;
      for (std::size_t k : order) {
        if (queues[k].size() < capacity && take_best(k)) progress = true;
      }
    }
  }
  return CandidateQueues(std::move(queues), pool.size());
}

}  // namespace sortgen
