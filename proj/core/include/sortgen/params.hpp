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

#ifndef SORTGEN_PARAMS_HPP_
#define SORTGEN_PARAMS_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "sortgen/tensor.hpp"

namespace sortgen::nn {

struct Parameter {
  Tensor value;
  Tensor grad;  // always shaped like value
};

/// Named trainable tensors with matching gradient accumulators. Iteration
/// order is the lexicographic order of names, which fixes the order of RNG
/// draws and of checkpoint records.
class ParamStore {
 public:
  /// Adds a parameter; throws if the name already exists.
  Tensor& add(std::string name, Tensor value);

  bool contains(std::string_view name) const;
  const Tensor& value(std::string_view name) const;
  Tensor& value(std::string_view name);
  const Tensor& grad(std::string_view name) const;
  Tensor& grad(std::string_view name);

  void zero_grad();
  std::size_t num_tensors() const { return params_.size(); }
  std::size_t num_scalars() const;
  std::vector<std::string> names() const;
  double value_norm() const;

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  bool operator==(const ParamStore& other) const;

 private:
  const Parameter& find(std::string_view name) const;
  std::map<std::string, Parameter, std::less<>> params_;
};

/// Adam optimizer state. `init` must be called before the first step.
struct AdamState {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t step = 0;
  std::map<std::string, Tensor, std::less<>> first_moment;
  std::map<std::string, Tensor, std::less<>> second_moment;

  void init(const ParamStore& params);
  bool initialized() const { return !first_moment.empty(); }
};

/// One bias-corrected Adam update from the accumulated gradients, which are
/// zeroed afterwards.
void adam_step(ParamStore& params, AdamState& state);

}  // namespace sortgen::nn

#endif  // SORTGEN_PARAMS_HPP_
