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

#ifndef SORTGEN_KERNELS_HPP_
#define SORTGEN_KERNELS_HPP_

#include <cstddef>
#include <span>

#include "sortgen/tensor.hpp"

namespace sortgen::nn {

// Every tensor-level operation below is a loop over the row kernels, and the
// incremental decoder calls the same row kernels. That is what makes batched,
// full-sequence and one-position-at-a-time evaluation agree bit for bit.

inline constexpr double kLayerNormEps = 1e-5;

/// y = x W + b for one row. W is [in, out].
void linear_row(std::span<const double> x, const Tensor& w, const Tensor& b,
                std::span<double> y);

/// Normalizes one row to zero mean / unit variance, then applies gain and
/// bias. Returns 1/sqrt(var + eps) for use by the backward pass.
double layer_norm_row(std::span<const double> x, std::span<const double> gain,
                      std::span<const double> bias, double eps,
                      std::span<double> y);

/// Scaled dot-product attention of one query row against `n_keys` key/value
/// rows (each of width d_model, heads laid out contiguously). `probs`, when
/// non-empty, receives the softmax weights as [n_heads, n_keys].
void attend_row(std::span<const double> query, std::span<const double> keys,
                std::span<const double> values, std::size_t n_keys,
                std::size_t n_heads, std::span<double> context,
                std::span<double> probs = {});

void relu_inplace(std::span<double> x);

struct AttentionParams {
  const Tensor& wq;
  const Tensor& bq;
  const Tensor& wk;
  const Tensor& bk;
  const Tensor& wv;
  const Tensor& bv;
  const Tensor& wo;
  const Tensor& bo;
};

struct FfnParams {
  const Tensor& w1;
  const Tensor& b1;
  const Tensor& w2;
  const Tensor& b2;
};

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b);
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                  double eps = kLayerNormEps);

/// Multi-head self-attention over x [B, T, d_model] where position t only
/// attends to positions <= t.
Tensor causal_mhsa(const Tensor& x, const AttentionParams& p,
                   std::size_t n_heads);

/// relu(x W1 + b1) W2 + b2.
Tensor ffn(const Tensor& x, const FfnParams& p);

double sigmoid(double x);
double softplus(double x);

}  // namespace sortgen::nn

#endif  // SORTGEN_KERNELS_HPP_
