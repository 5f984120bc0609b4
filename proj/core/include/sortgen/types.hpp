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

#ifndef SORTGEN_TYPES_HPP_
#define SORTGEN_TYPES_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sortgen {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

using ItemId = std::int64_t;

/// A candidate coming out of the ranking stage.
///
/// `embedding` is unit-norm so that cosine similarity is a dot product.
/// `prior_ctr` / `prior_cvr` are the upstream ranking model's estimates and
/// double as the score block of the model input.
struct Item {
  ItemId id = 0;
  std::vector<double> embedding;
  double price = 0.0;
  double prior_ctr = 0.0;
  double prior_cvr = 0.0;
  int category = 0;

  bool operator==(const Item&) const = default;
};

/// Throws ConfigError naming the first violated field.
void validate_item(const Item& item, std::size_t d_emb);

struct UserContext {
  std::vector<double> features;

  bool operator==(const UserContext&) const = default;
};

/// Inference-time trade-off between list-level click, conversion and GMV.
struct ObjectiveWeights {
  double alpha = 5.0;
  double beta = 1.0;
  double gamma = 1.0;

  bool operator==(const ObjectiveWeights&) const = default;
};

void validate_weights(const ObjectiveWeights& weights);

/// An ordered (partial) slate. Holds pool indices, not copies.
struct SubList {
  std::vector<std::size_t> items;
  std::vector<int> source_queues;

  std::size_t size() const { return items.size(); }
  bool operator==(const SubList&) const = default;
};

/// Checks the SubList invariants against the pool it indexes: equal-length
/// arrays, in-range indices, no duplicate item ids, length <= max_length.
void validate_sublist(const SubList& list, std::span<const Item> pool,
                      std::size_t max_length);

double dot(std::span<const double> a, std::span<const double> b);

/// Returns a copy of `v` scaled to unit Euclidean norm. Zero vectors throw.
std::vector<double> normalized(std::span<const double> v);

}  // namespace sortgen

#endif  // SORTGEN_TYPES_HPP_
