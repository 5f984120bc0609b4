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

#include "sortgen/types.hpp"

#include <cmath>
#include <string>
#include <unordered_set>

namespace sortgen {

void validate_item(const Item& item, std::size_t d_emb) {
  const std::string where = "item " + std::to_string(item.id) + ": ";
  if (item.embedding.size() != d_emb) {
    throw ConfigError(where + "embedding has " +
                      std::to_string(item.embedding.size()) +
                      " components, expected " + std::to_string(d_emb));
  }
  double norm2 = 0.0;
  for (double v : item.embedding) {
    if (!std::isfinite(v)) throw ConfigError(where + "non-finite embedding");
    norm2 += v * v;
  }
  if (std::abs(std::sqrt(norm2) - 1.0) > 1e-6) {
    throw ConfigError(where + "embedding is not unit-norm");
  }
  if (!(item.price >= 0.0) || !std::isfinite(item.price)) {
    throw ConfigError(where + "price must be finite and non-negative");
  }
  if (!(item.prior_ctr >= 0.0 && item.prior_ctr <= 1.0)) {
    throw ConfigError(where + "prior_ctr outside [0,1]");
  }
  if (!(item.prior_cvr >= 0.0 && item.prior_cvr <= 1.0)) {
    throw ConfigError(where + "prior_cvr outside [0,1]");
  }
}

void validate_weights(const ObjectiveWeights& w) {
  if (!(w.alpha >= 0.0) || !(w.beta >= 0.0) || !(w.gamma >= 0.0)) {
    throw ConfigError("objective weights must be non-negative");
  }
  if (!(w.alpha + w.beta + w.gamma > 0.0)) {
    throw ConfigError("objective weights must not all be zero");
  }
}

void validate_sublist(const SubList& list, std::span<const Item> pool,
                      std::size_t max_length) {
  if (list.items.size() != list.source_queues.size()) {
    throw ShapeError("sub-list items and source_queues differ in length");
  }
  if (list.items.size() > max_length) {
    throw ShapeError("sub-list longer than " + std::to_string(max_length));
  }
  std::unordered_set<ItemId> seen;
  for (std::size_t index : list.items) {
    if (index >= pool.size()) throw ShapeError("sub-list index out of pool");
    if (!seen.insert(pool[index].id).second) {
      throw ShapeError("duplicate item id " + std::to_string(pool[index].id));
    }
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("dot: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

std::vector<double> normalized(std::span<const double> v) {
  double norm = std::sqrt(dot(v, v));
  if (!(norm > 0.0)) throw ShapeError("cannot normalize a zero vector");
  std::vector<double> out(v.begin(), v.end());
  for (double& x : out) x /= norm;
  return out;
}

}  // namespace sortgen
