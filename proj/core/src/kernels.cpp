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

#include "sortgen/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "sortgen/types.hpp"

namespace sortgen::nn {

void linear_row(std::span<const double> x, const Tensor& w, const Tensor& b,
                std::span<double> y) {
  const std::size_t in = x.size();
  const std::size_t out = y.size();
  const double* wp = w.data().data();
  std::copy(b.data().begin(), b.data().end(), y.begin());
  for (std::size_t i = 0; i < in; ++i) {
    const double xi = x[i];
    const double* wrow = wp + i * out;
    for (std::size_t o = 0; o < out; ++o) y[o] += xi * wrow[o];
  }
}

double layer_norm_row(std::span<const double> x, std::span<const double> gain,
                      std::span<const double> bias, double eps,
                      std::span<double> y) {
  const std::size_t d = x.size();
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(d);
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= static_cast<double>(d);
  const double inv_std = 1.0 / std::sqrt(var + eps);
  for (std::size_t i = 0; i < d; ++i) {
    y[i] = (x[i] - mean) * inv_std * gain[i] + bias[i];
  }
  return inv_std;
}

void attend_row(std::span<const double> query, std::span<const double> keys,
                std::span<const double> values, std::size_t n_keys,
                std::size_t n_heads, std::span<double> context,
                std::span<double> probs) {
  const std::size_t d_model = query.size();
  const std::size_t d_head = d_model / n_heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(d_head));
  std::vector<double> weights(n_keys);
  std::fill(context.begin(), context.end(), 0.0);
  for (std::size_t h = 0; h < n_heads; ++h) {
    const std::size_t off = h * d_head;
    double max_logit = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n_keys; ++k) {
      const double* key = keys.data() + k * d_model + off;
      double s = 0.0;
      for (std::size_t c = 0; c < d_head; ++c) s += query[off + c] * key[c];
      weights[k] = s * scale;
      max_logit = std::max(max_logit, weights[k]);
    }
    double total = 0.0;
    for (std::size_t k = 0; k < n_keys; ++k) {
      weights[k] = std::exp(weights[k] - max_logit);
      total += weights[k];
    }
    for (std::size_t k = 0; k < n_keys; ++k) {
      const double p = weights[k] / total;
      if (!probs.empty()) probs[h * n_keys + k] = p;
      const double* value = values.data() + k * d_model + off;
      for (std::size_t c = 0; c < d_head; ++c) context[off + c] += p * value[c];
    }
  }
}

void relu_inplace(std::span<double> x) {
  for (double& v : x) v = v > 0.0 ? v : 0.0;
}

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b) {
  if (w.rank() != 2 || x.last_dim() != w.dim(0) || b.size() != w.dim(1)) {
    throw ShapeError("linear: x " + shape_string(x.shape()) + ", W " +
                     shape_string(w.shape()) + ", b " +
                     shape_string(b.shape()));
  }
  std::vector<std::size_t> shape = x.shape();
  shape.back() = w.dim(1);
  Tensor y(std::move(shape));
  for (std::size_t r = 0; r < x.rows(); ++r) linear_row(x.row(r), w, b, y.row(r));
  return y;
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                  double eps) {
  const std::size_t d = x.last_dim();
  if (d < 2) throw ShapeError("layer_norm: last axis must have extent >= 2");
  if (gain.size() != d || bias.size() != d) {
    throw ShapeError("layer_norm: gain/bias width mismatch");
  }
  Tensor y(x.shape());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    layer_norm_row(x.row(r), gain.data(), bias.data(), eps, y.row(r));
  }
  return y;
}

Tensor causal_mhsa(const Tensor& x, const AttentionParams& p,
                   std::size_t n_heads) {
  if (x.rank() != 3) throw ShapeError("causal_mhsa: expected [B, T, d_model]");
  const std::size_t batch = x.dim(0);
  const std::size_t len = x.dim(1);
  const std::size_t d = x.dim(2);
  if (n_heads == 0 || d % n_heads != 0) {
    throw ShapeError("causal_mhsa: d_model not divisible by n_heads");
  }
  Tensor q = linear(x, p.wq, p.bq);
  Tensor k = linear(x, p.wk, p.bk);
  Tensor v = linear(x, p.wv, p.bv);
  if (q.last_dim() != d || k.last_dim() != d || v.last_dim() != d) {
    throw ShapeError("causal_mhsa: projections must preserve d_model");
  }
  Tensor ctx(x.shape());
  for (std::size_t b = 0; b < batch; ++b) {
    const std::size_t base = b * len;
    for (std::size_t t = 0; t < len; ++t) {
      attend_row(q.row(base + t), k.data().subspan(base * d, (t + 1) * d),
                 v.data().subspan(base * d, (t + 1) * d), t + 1, n_heads,
                 ctx.row(base + t));
    }
  }
  return linear(ctx, p.wo, p.bo);
}

Tensor ffn(const Tensor& x, const FfnParams& p) {
  Tensor hidden = linear(x, p.w1, p.b1);
  relu_inplace(hidden.data());
  return linear(hidden, p.w2, p.b2);
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

}  // namespace sortgen::nn
