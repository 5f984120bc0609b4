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

#include "sortgen/tape.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <random>

#include "sortgen/kernels.hpp"
#include "sortgen/types.hpp"

namespace sortgen::nn {

const Tape::Node& Tape::node(Var v) const {
  if (!v.valid() || v.id >= nodes_.size()) {
    throw Error("tape: variable was not recorded on this tape");
  }
  return nodes_[v.id];
}

const Tensor& Tape::value(Var v) const {
  const Node& n = node(v);
  return n.external ? *n.external : n.value;
}

Tensor Tape::grad(Var v) const {
  node(v);
  if (v.id < grads_.size() && !grads_[v.id].empty()) return grads_[v.id];
  return Tensor(value(v).shape());
}

Var Tape::push(Node n) {
  if (!n.external && !n.value.all_finite()) {
    throw Error("tape: non-finite values produced by op #" +
                std::to_string(nodes_.size()));
  }
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

Var Tape::constant(Tensor value) {
  Node n;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Tape::param(std::string_view name) {
  Node n;
  n.external = &params_->value(name);
  n.param_name = std::string(name);
  n.requires_grad = true;
  return push(std::move(n));
}

Var Tape::custom(Tensor value, std::vector<Var> inputs, BackwardFn backward) {
  Node n;
  n.value = std::move(value);
  for (Var in : inputs) n.requires_grad |= node(in).requires_grad;
  n.inputs = std::move(inputs);
  n.backward = std::move(backward);
  return push(std::move(n));
}

Var Tape::linear(Var x, Var w, Var b) {
  const Tensor& xv = value(x);
  const Tensor& wv = value(w);
  Tensor out = nn::linear(xv, wv, value(b));
  return custom(std::move(out), {x, w, b},
                [this, x, w](const Tensor& dy, std::span<Tensor* const> g) {
                  const Tensor& xv = value(x);
                  const Tensor& wv = value(w);
                  const std::size_t in = wv.dim(0);
                  const std::size_t out = wv.dim(1);
                  const std::size_t rows = xv.rows();
                  const double* W = wv.data().data();
                  const double* X = xv.data().data();
                  const double* D = dy.data().data();
                  if (g[0]) {
                    double* dx = g[0]->data().data();
                    for (std::size_t r = 0; r < rows; ++r) {
                      for (std::size_t i = 0; i < in; ++i) {
                        double acc = 0.0;
                        const double* wrow = W + i * out;
                        const double* drow = D + r * out;
                        for (std::size_t o = 0; o < out; ++o) acc += drow[o] * wrow[o];
                        dx[r * in + i] += acc;
                      }
                    }
                  }
                  if (g[1]) {
                    double* dw = g[1]->data().data();
                    for (std::size_t r = 0; r < rows; ++r) {
                      const double* drow = D + r * out;
                      for (std::size_t i = 0; i < in; ++i) {
                        const double xi = X[r * in + i];
                        if (xi == 0.0) continue;
                        double* dwrow = dw + i * out;
                        for (std::size_t o = 0; o < out; ++o) dwrow[o] += xi * drow[o];
                      }
                    }
                  }
                  if (g[2]) {
                    double* db = g[2]->data().data();
                    for (std::size_t r = 0; r < rows; ++r) {
                      for (std::size_t o = 0; o < out; ++o) db[o] += D[r * out + o];
                    }
                  }
                });
}

Var Tape::layer_norm(Var x, Var gain, Var bias, double eps) {
  Tensor out = nn::layer_norm(value(x), value(gain), value(bias), eps);
  return custom(
      std::move(out), {x, gain, bias},
      [this, x, gain, eps](const Tensor& dy, std::span<Tensor* const> g) {
        const Tensor& xv = value(x);
        const Tensor& gv = value(gain);
        const std::size_t d = xv.last_dim();
        std::vector<double> xhat(d);
        std::vector<double> dxhat(d);
        for (std::size_t r = 0; r < xv.rows(); ++r) {
          auto xr = xv.row(r);
          auto dr = dy.row(r);
          double mean = 0.0;
          for (double v : xr) mean += v;
          mean /= static_cast<double>(d);
          double var = 0.0;
          for (double v : xr) var += (v - mean) * (v - mean);
          var /= static_cast<double>(d);
          const double inv_std = 1.0 / std::sqrt(var + eps);
          double mean_dxhat = 0.0;
          double mean_dxhat_xhat = 0.0;
          for (std::size_t i = 0; i < d; ++i) {
            xhat[i] = (xr[i] - mean) * inv_std;
            dxhat[i] = dr[i] * gv[i];
            mean_dxhat += dxhat[i];
            mean_dxhat_xhat += dxhat[i] * xhat[i];
          }
          mean_dxhat /= static_cast<double>(d);
          mean_dxhat_xhat /= static_cast<double>(d);
          if (g[0]) {
            auto dx = g[0]->row(r);
            for (std::size_t i = 0; i < d; ++i) {
              dx[i] += inv_std * (dxhat[i] - mean_dxhat - xhat[i] * mean_dxhat_xhat);
            }
          }
          if (g[1]) {
            for (std::size_t i = 0; i < d; ++i) (*g[1])[i] += dr[i] * xhat[i];
          }
          if (g[2]) {
            for (std::size_t i = 0; i < d; ++i) (*g[2])[i] += dr[i];
          }
        }
      });
}

Var Tape::causal_attention(Var q, Var k, Var v, std::size_t n_heads) {
  const Tensor& qv = value(q);
  const Tensor& kv = value(k);
  const Tensor& vv = value(v);
  if (qv.rank() != 3 || qv.shape() != kv.shape() || qv.shape() != vv.shape()) {
    throw ShapeError("causal_attention: q, k, v must share shape [B, T, d]");
  }
  const std::size_t batch = qv.dim(0);
  const std::size_t len = qv.dim(1);
  const std::size_t d = qv.dim(2);
  if (n_heads == 0 || d % n_heads != 0) {
    throw ShapeError("causal_attention: d_model not divisible by n_heads");
  }
  // probs[(b * T + t) * H * T + h * T + k], zero for k > t.
  auto probs = std::make_shared<std::vector<double>>(batch * len * n_heads * len, 0.0);
  Tensor ctx(qv.shape());
  for (std::size_t b = 0; b < batch; ++b) {
    const std::size_t base = b * len;
    for (std::size_t t = 0; t < len; ++t) {
      std::vector<double> row_probs(n_heads * (t + 1));
      attend_row(qv.row(base + t), kv.data().subspan(base * d, (t + 1) * d),
                 vv.data().subspan(base * d, (t + 1) * d), t + 1, n_heads,
                 ctx.row(base + t), row_probs);
      double* dst = probs->data() + (base + t) * n_heads * len;
      for (std::size_t h = 0; h < n_heads; ++h) {
        for (std::size_t kk = 0; kk <= t; ++kk) {
          dst[h * len + kk] = row_probs[h * (t + 1) + kk];
        }
      }
    }
  }
  return custom(
      std::move(ctx), {q, k, v},
      [this, q, k, v, n_heads, probs](const Tensor& dy, std::span<Tensor* const> g) {
        const Tensor& qv = value(q);
        const Tensor& kv = value(k);
        const Tensor& vv = value(v);
        const std::size_t batch = qv.dim(0);
        const std::size_t len = qv.dim(1);
        const std::size_t d = qv.dim(2);
        const std::size_t dh = d / n_heads;
        const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
        std::vector<double> dp(len);
        for (std::size_t b = 0; b < batch; ++b) {
          const std::size_t base = b * len;
          for (std::size_t t = 0; t < len; ++t) {
            const double* dctx = dy.row(base + t).data();
            const double* qrow = qv.row(base + t).data();
            for (std::size_t h = 0; h < n_heads; ++h) {
              const std::size_t off = h * dh;
              const double* p = probs->data() + (base + t) * n_heads * len + h * len;
              double weighted = 0.0;
              for (std::size_t kk = 0; kk <= t; ++kk) {
                const double* vrow = vv.row(base + kk).data() + off;
                double acc = 0.0;
                for (std::size_t c = 0; c < dh; ++c) acc += dctx[off + c] * vrow[c];
                dp[kk] = acc;
                weighted += p[kk] * acc;
                if (g[2]) {
                  double* dv = g[2]->row(base + kk).data() + off;
                  for (std::size_t c = 0; c < dh; ++c) dv[c] += p[kk] * dctx[off + c];
                }
              }
              for (std::size_t kk = 0; kk <= t; ++kk) {
                const double ds = p[kk] * (dp[kk] - weighted) * scale;
                if (ds == 0.0) continue;
                const double* krow = kv.row(base + kk).data() + off;
                if (g[0]) {
                  double* dq = g[0]->row(base + t).data() + off;
                  for (std::size_t c = 0; c < dh; ++c) dq[c] += ds * krow[c];
                }
                if (g[1]) {
                  double* dk = g[1]->row(base + kk).data() + off;
                  for (std::size_t c = 0; c < dh; ++c) dk[c] += ds * qrow[off + c];
                }
              }
            }
          }
        }
      });
}

Var Tape::relu(Var x) {
  Tensor out = value(x);
  relu_inplace(out.data());
  Var result{nodes_.size()};
  return custom(std::move(out), {x},
                [this, result](const Tensor& dy, std::span<Tensor* const> g) {
                  if (!g[0]) return;
                  const Tensor& y = value(result);
                  for (std::size_t i = 0; i < y.size(); ++i) {
                    if (y[i] > 0.0) (*g[0])[i] += dy[i];
                  }
                });
}

Var Tape::add(Var a, Var b) {
  const Tensor& av = value(a);
  const Tensor& bv = value(b);
  if (av.shape() != bv.shape()) {
    throw ShapeError("add: shapes " + shape_string(av.shape()) + " and " +
                     shape_string(bv.shape()));
  }
  Tensor out(av.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
  return custom(std::move(out), {a, b},
                [](const Tensor& dy, std::span<Tensor* const> g) {
                  for (Tensor* slot : g) {
                    if (!slot) continue;
                    for (std::size_t i = 0; i < dy.size(); ++i) (*slot)[i] += dy[i];
                  }
                });
}

Var Tape::sum(Var x) {
  const Tensor& xv = value(x);
  double acc = 0.0;
  for (double v : xv.data()) acc += v;
  return custom(Tensor({1}, {acc}), {x},
                [](const Tensor& dy, std::span<Tensor* const> g) {
                  if (!g[0]) return;
                  for (double& v : g[0]->data()) v += dy[0];
                });
}

Var Tape::scale(Var x, double factor) {
  Tensor out = value(x);
  for (double& v : out.data()) v *= factor;
  return custom(std::move(out), {x},
                [factor](const Tensor& dy, std::span<Tensor* const> g) {
                  if (!g[0]) return;
                  for (std::size_t i = 0; i < dy.size(); ++i) (*g[0])[i] += factor * dy[i];
                });
}

Var Tape::concat_last(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_last: no inputs");
  const Tensor& first = value(parts[0]);
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (Var p : parts) {
    const Tensor& t = value(p);
    if (t.rank() != first.rank() || t.rows() != first.rows() ||
        !std::equal(t.shape().begin(), t.shape().end() - 1, first.shape().begin())) {
      throw ShapeError("concat_last: leading extents differ");
    }
    widths.push_back(t.last_dim());
    total += t.last_dim();
  }
  std::vector<std::size_t> shape = first.shape();
  shape.back() = total;
  Tensor out(shape);
  for (std::size_t r = 0; r < first.rows(); ++r) {
    auto dst = out.row(r);
    std::size_t off = 0;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      auto src = value(parts[i]).row(r);
      std::copy(src.begin(), src.end(), dst.begin() + off);
      off += widths[i];
    }
  }
  return custom(std::move(out), std::vector<Var>(parts.begin(), parts.end()),
                [widths](const Tensor& dy, std::span<Tensor* const> g) {
                  for (std::size_t r = 0; r < dy.rows(); ++r) {
                    auto src = dy.row(r);
                    std::size_t off = 0;
                    for (std::size_t i = 0; i < widths.size(); ++i) {
                      if (g[i]) {
                        auto dst = g[i]->row(r);
                        for (std::size_t c = 0; c < widths[i]; ++c) dst[c] += src[off + c];
                      }
                      off += widths[i];
                    }
                  }
                });
}

Var Tape::broadcast_rows(Var table, std::size_t batch, std::size_t length) {
  const Tensor& tv = value(table);
  if (tv.rank() != 2) throw ShapeError("broadcast_rows: table must be 2-D");
  if (length > tv.dim(0)) {
    throw ShapeError("broadcast_rows: length " + std::to_string(length) +
                     " exceeds table rows " + std::to_string(tv.dim(0)));
  }
  const std::size_t d = tv.dim(1);
  Tensor out({batch, length, d});
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t t = 0; t < length; ++t) {
      auto src = tv.row(t);
      std::copy(src.begin(), src.end(), out.row(b * length + t).begin());
    }
  }
  return custom(std::move(out), {table},
                [batch, length](const Tensor& dy, std::span<Tensor* const> g) {
                  if (!g[0]) return;
                  for (std::size_t b = 0; b < batch; ++b) {
                    for (std::size_t t = 0; t < length; ++t) {
                      auto src = dy.row(b * length + t);
                      auto dst = g[0]->row(t);
                      for (std::size_t c = 0; c < src.size(); ++c) dst[c] += src[c];
                    }
                  }
                });
}

void Tape::backward(Var loss, ParamStore& grads) {
  const Tensor& lv = value(loss);
  if (lv.size() != 1) throw Error("backward: loss must be a scalar");
  grads_.assign(nodes_.size(), Tensor());
  grads_[loss.id] = Tensor(lv.shape(), 1.0);
  std::vector<Tensor*> slots;
  for (std::size_t id = loss.id + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (grads_[id].empty()) continue;
    if (!n.param_name.empty()) {
      Tensor& dst = grads.grad(n.param_name);
      if (dst.shape() != grads_[id].shape()) {
        throw ShapeError("backward: gradient shape mismatch for " + n.param_name);
      }
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += grads_[id][i];
      continue;
    }
    if (!n.backward) continue;
    slots.clear();
    for (Var in : n.inputs) {
      if (!nodes_[in.id].requires_grad) {
        slots.push_back(nullptr);
        continue;
      }
      if (grads_[in.id].empty()) grads_[in.id] = Tensor(value(in).shape());
      slots.push_back(&grads_[in.id]);
    }
    n.backward(grads_[id], slots);
  }
}

double finite_diff_check(ParamStore& params, const LossFn& loss_fn, double step,
                         std::size_t samples, std::uint64_t seed) {
  if (!(step > 0.0) || !std::isfinite(step)) {
    throw Error("finite_diff_check: step must be positive and finite");
  }
  // Flat coordinate index over all parameters in name order.
  std::vector<std::pair<Tensor*, Tensor*>> tensors;
  std::vector<std::size_t> offsets;
  std::size_t total = 0;
  for (auto& [name, p] : params) {
    tensors.emplace_back(&p.value, &p.grad);
    offsets.push_back(total);
    total += p.value.size();
  }
  if (total == 0) return 0.0;

  params.zero_grad();
  const double base = loss_fn(params);
  if (!std::isfinite(base)) throw Error("finite_diff_check: non-finite loss");
  std::vector<std::vector<double>> analytic;
  for (auto& [value, grad] : tensors) {
    analytic.emplace_back(grad->data().begin(), grad->data().end());
  }

  std::vector<std::size_t> coords(total);
  std::iota(coords.begin(), coords.end(), std::size_t{0});
  if (samples < total) {
    std::mt19937_64 rng(seed);
    std::shuffle(coords.begin(), coords.end(), rng);
    coords.resize(samples);
  }

  double worst = 0.0;
  for (std::size_t flat : coords) {
    const auto t = static_cast<std::size_t>(
        std::upper_bound(offsets.begin(), offsets.end(), flat) - offsets.begin() - 1);
    const std::size_t i = flat - offsets[t];
    double& w = (*tensors[t].first)[i];
    const double saved = w;
    w = saved + step;
    const double plus = loss_fn(params);
    w = saved - step;
    const double minus = loss_fn(params);
    w = saved;
    if (!std::isfinite(plus) || !std::isfinite(minus)) {
      throw Error("finite_diff_check: non-finite loss");
    }
    const double numeric = (plus - minus) / (2.0 * step);
    const double a = analytic[t][i];
    const double rel = std::abs(a - numeric) /
                       std::max(1e-8, std::abs(a) + std::abs(numeric));
    worst = std::max(worst, rel);
  }
  params.zero_grad();
  return worst;
}

}  // namespace sortgen::nn
