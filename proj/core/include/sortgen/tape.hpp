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

#ifndef SORTGEN_TAPE_HPP_
#define SORTGEN_TAPE_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sortgen/params.hpp"
#include "sortgen/tensor.hpp"

namespace sortgen::nn {

/// Handle to a value recorded on a Tape.
struct Var {
  static constexpr std::size_t kInvalid = std::numeric_limits<std::size_t>::max();
  std::size_t id = kInvalid;
  bool valid() const { return id != kInvalid; }
};

/// Reverse-mode gradient tape over the handful of operations the model
/// needs. Each op computes its forward value eagerly with the shared row
/// kernels and records a hand-derived backward rule.
///
/// The tape reads parameters from a ParamStore it does not own and never
/// mutates; backward() accumulates into a (possibly different) store's
/// gradient tensors, so several forward passes may share one store.
class Tape {
 public:
  /// Receives the gradient of the op output and one gradient slot per input
  /// (nullptr when that input needs no gradient).
  using BackwardFn =
      std::function<void(const Tensor& out_grad, std::span<Tensor* const> in_grads)>;

  explicit Tape(const ParamStore& params) : params_(&params) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  Var param(std::string_view name);

  const Tensor& value(Var v) const;
  /// Gradient after backward(); an all-zero tensor if none flowed.
  Tensor grad(Var v) const;
  std::size_t size() const { return nodes_.size(); }

  Var linear(Var x, Var w, Var b);
  Var layer_norm(Var x, Var gain, Var bias, double eps);
  /// Causal attention core: q, k, v are [B, T, d_model].
  Var causal_attention(Var q, Var k, Var v, std::size_t n_heads);
  Var relu(Var x);
  Var add(Var a, Var b);
  Var sum(Var x);
  Var scale(Var x, double factor);
  Var concat_last(std::span<const Var> parts);
  /// Rows 0..length-1 of a [R, d] table repeated over a batch: [B, length, d].
  Var broadcast_rows(Var table, std::size_t batch, std::size_t length);

  /// Records an op whose value was computed by the caller.
  Var custom(Tensor value, std::vector<Var> inputs, BackwardFn backward);

  /// Back-propagates d(loss)/d(.) from a scalar `loss` and adds parameter
  /// gradients into `grads`. Calling it twice adds twice.
  void backward(Var loss, ParamStore& grads);

 private:
  struct Node {
    Tensor value;
    const Tensor* external = nullptr;  // parameter value, not copied
    std::string param_name;
    std::vector<Var> inputs;
    BackwardFn backward;
    bool requires_grad = false;
  };

  const Node& node(Var v) const;
  Var push(Node n);

  const ParamStore* params_;
  std::vector<Node> nodes_;
  std::vector<Tensor> grads_;
};

/// Runs forward + backward on the parameters and returns the loss. Used by
/// finite_diff_check; must be deterministic.
using LossFn = std::function<double(ParamStore& params)>;

/// Compares analytic gradients produced by `loss_fn` against central finite
/// differences at `samples` randomly chosen coordinates (all coordinates if
/// there are fewer). Returns max |a - n| / max(1e-8, |a| + |n|).
double finite_diff_check(ParamStore& params, const LossFn& loss_fn, double step,
                         std::size_t samples = 64, std::uint64_t seed = 1);

}  // namespace sortgen::nn

#endif  // SORTGEN_TAPE_HPP_
