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

#include "sortgen/model.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <string>

#include "sortgen/kernels.hpp"

namespace sortgen {
namespace {

using nn::Tensor;
using nn::Var;

std::string block(std::size_t n, const char* suffix) {
  return "block" + std::to_string(n) + "." + suffix;
}

std::string head(Objective o, const char* suffix) {
  return std::string(o == Objective::kClick ? "head.click." : "head.pay.") + suffix;
}

// Packed per-position input row in block order item, position, user, score.
std::vector<double> input_row(const Item& item, std::span<const double> position,
                              const UserContext& user) {
  std::vector<double> row;
  row.reserve(item.embedding.size() + position.size() + user.features.size() + 2);
  row.insert(row.end(), item.embedding.begin(), item.embedding.end());
  row.insert(row.end(), position.begin(), position.end());
  row.insert(row.end(), user.features.begin(), user.features.end());
  row.push_back(item.prior_ctr);
  row.push_back(item.prior_cvr);
  return row;
}

void check_item(const Item& item, const EngineConfig& c) {
  if (item.embedding.size() != c.d_emb) {
    throw ShapeError("item " + std::to_string(item.id) + ": embedding width " +
                     std::to_string(item.embedding.size()) + " != d_emb " +
                     std::to_string(c.d_emb));
  }
}

void check_user(const UserContext& user, const EngineConfig& c) {
  if (user.features.size() != c.d_user) {
    throw ShapeError("user feature width " + std::to_string(user.features.size()) +
                     " != d_user " + std::to_string(c.d_user));
  }
}

}  // namespace

ModelInput assemble_input(const std::vector<std::vector<const Item*>>& sequences,
                          const std::vector<const UserContext*>& users,
                          const EngineConfig& c) {
  if (sequences.empty()) throw ShapeError("assemble_input: empty batch");
  if (users.size() != sequences.size()) {
    throw ShapeError("assemble_input: one user per sequence required");
  }
  const std::size_t len = sequences.front().size();
  if (len == 0) throw ShapeError("assemble_input: empty sub-list");
  if (len > c.l_o) {
    throw ShapeError("assemble_input: length " + std::to_string(len) +
                     " exceeds position table size l_o=" + std::to_string(c.l_o));
  }
  ModelInput in;
  in.batch = sequences.size();
  in.length = len;
  in.item = Tensor({in.batch, len, c.d_emb});
  in.user = Tensor({in.batch, c.d_user});
  in.score = Tensor({in.batch, len, 2});
  for (std::size_t b = 0; b < in.batch; ++b) {
    if (sequences[b].size() != len) {
      throw ShapeError("assemble_input: sequences differ in length");
    }
    check_user(*users[b], c);
    std::copy(users[b]->features.begin(), users[b]->features.end(),
              in.user.row(b).begin());
    for (std::size_t t = 0; t < len; ++t) {
      const Item& item = *sequences[b][t];
      check_item(item, c);
      std::copy(item.embedding.begin(), item.embedding.end(),
                in.item.row(b * len + t).begin());
      in.score.row(b * len + t)[0] = item.prior_ctr;
      in.score.row(b * len + t)[1] = item.prior_cvr;
    }
  }
  return in;
}

ModelInput assemble_input(std::span<const Item> pool, const SubList& list,
                          const UserContext& user, const EngineConfig& c) {
  std::vector<const Item*> seq;
  for (std::size_t index : list.items) {
    if (index >= pool.size()) throw ShapeError("assemble_input: index out of pool");
    seq.push_back(&pool[index]);
  }
  return assemble_input({seq}, {&user}, c);
}

Tensor concat_input(const ModelInput& in, const Tensor& position_table) {
  if (position_table.rank() != 2 || position_table.dim(0) < in.length) {
    throw ShapeError("concat_input: position table too short");
  }
  const std::size_t d_emb = in.item.last_dim();
  const std::size_t d_pos = position_table.dim(1);
  const std::size_t d_user = in.user.last_dim();
  const std::size_t width = d_emb + d_pos + d_user + 2;
  Tensor out({in.batch, in.length, width});
  for (std::size_t b = 0; b < in.batch; ++b) {
    for (std::size_t t = 0; t < in.length; ++t) {
      auto dst = out.row(b * in.length + t).begin();
      auto item = in.item.row(b * in.length + t);
      dst = std::copy(item.begin(), item.end(), dst);
      auto pos = position_table.row(t);
      dst = std::copy(pos.begin(), pos.end(), dst);
      auto user = in.user.row(b);
      dst = std::copy(user.begin(), user.end(), dst);
      auto score = in.score.row(b * in.length + t);
      std::copy(score.begin(), score.end(), dst);
    }
  }
  return out;
}

void survival_row(std::span<const double> logits, std::size_t position,
                  HeadMode mode, std::span<double> probs) {
  const std::size_t reachable = position + 1;
  if (mode == HeadMode::kLiteral) {
    for (std::size_t i = 0; i < logits.size(); ++i) {
      probs[i] = i < reachable ? nn::sigmoid(logits[i]) : 0.0;
    }
    return;
  }
  // Cumulative link: z_1 = o_1, z_i = z_{i-1} - softplus(o_i).
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    z = i == 0 ? logits[0] : z - nn::softplus(logits[i]);
    probs[i] = i < reachable ? nn::sigmoid(z) : 0.0;
  }
}

SortModel::SortModel(EngineConfig config, nn::ParamStore params)
    : config_(std::move(config)), params_(std::move(params)) {
  require_valid(config_);
  const nn::ParamStore reference = init_params(config_, 0);
  for (const auto& [name, p] : reference) {
    if (!params_.contains(name) || params_.value(name).shape() != p.value.shape()) {
      throw ShapeError("model parameters do not match configuration at '" + name + "'");
    }
  }
  if (params_.num_tensors() != reference.num_tensors()) {
    throw ShapeError("model parameters contain unexpected tensors");
  }
}

SortModel SortModel::initialize(const EngineConfig& config, std::uint64_t seed) {
  return SortModel(config, init_params(config, seed));
}

nn::ParamStore SortModel::init_params(const EngineConfig& c, std::uint64_t seed) {
  require_valid(c);
  nn::ParamStore store;
  const std::size_t dm = c.d_model;
  auto add_linear = [&](const std::string& w, const std::string& b,
                        std::size_t in, std::size_t out) {
    store.add(w, Tensor({in, out}));
    store.add(b, Tensor({out}));
  };
  auto add_norm = [&](const std::string& prefix) {
    store.add(prefix + ".gain", Tensor({dm}, 1.0));
    store.add(prefix + ".bias", Tensor({dm}));
  };
  add_linear("input.w", "input.b", c.input_width(), dm);
  store.add("position", Tensor({c.l_o, c.d_position}));
  for (std::size_t n = 0; n < c.n_layers; ++n) {
    add_norm(block(n, "ln1"));
    add_linear(block(n, "attn.wq"), block(n, "attn.bq"), dm, dm);
    // Keys carry no bias: softmax is blind to it, so it would never train.
    store.add(block(n, "attn.wk"), Tensor({dm, dm}));
    add_linear(block(n, "attn.wv"), block(n, "attn.bv"), dm, dm);
    add_linear(block(n, "attn.wo"), block(n, "attn.bo"), dm, dm);
    add_norm(block(n, "ln2"));
    add_linear(block(n, "ffn.w1"), block(n, "ffn.b1"), dm, 4 * dm);
    add_linear(block(n, "ffn.w2"), block(n, "ffn.b2"), 4 * dm, dm);
  }
  add_norm("final_ln");
  for (Objective o : {Objective::kClick, Objective::kPay}) {
    add_linear(head(o, "w1"), head(o, "b1"), dm, c.head_hidden);
    add_linear(head(o, "w2"), head(o, "b2"), c.head_hidden, c.max_count);
  }

  std::mt19937_64 rng(seed);
  for (auto& [name, p] : store) {
    const bool is_matrix = p.value.rank() == 2 && name != "position";
    if (name == "position") {
      std::uniform_real_distribution<double> dist(-0.1, 0.1);
      for (double& v : p.value.data()) v = dist(rng);
    } else if (is_matrix) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(p.value.dim(0)));
      std::uniform_real_distribution<double> dist(-bound, bound);
      for (double& v : p.value.data()) v = dist(rng);
    }
  }
  return store;
}

std::size_t SortModel::parameter_count(const EngineConfig& c) {
  const std::size_t dm = c.d_model;
  const std::size_t d = c.input_width();
  const std::size_t per_layer = 2 * dm                 // ln1
                                + 4 * dm * dm + 3 * dm  // q, k, v, o; keys unbiased
                                + 2 * dm                // ln2
                                + (dm * 4 * dm + 4 * dm) + (4 * dm * dm + dm);
  const std::size_t per_head =
      dm * c.head_hidden + c.head_hidden + c.head_hidden * c.max_count + c.max_count;
  return d * dm + dm + c.l_o * c.d_position + c.n_layers * per_layer + 2 * dm +
         2 * per_head;
}

ForwardVars SortModel::forward(nn::Tape& tape, const ModelInput& in) const {
  const EngineConfig& c = config_;
  if (in.length == 0 || in.length > c.l_o) {
    throw ShapeError("forward: list length must be in [1, l_o]");
  }
  if (in.item.shape() != std::vector<std::size_t>{in.batch, in.length, c.d_emb} ||
      in.user.shape() != std::vector<std::size_t>{in.batch, c.d_user} ||
      in.score.shape() != std::vector<std::size_t>{in.batch, in.length, 2}) {
    throw ShapeError("forward: model input blocks do not match configuration");
  }
  const std::size_t B = in.batch;
  const std::size_t T = in.length;

  Tensor user_rows({B, T, c.d_user});
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t t = 0; t < T; ++t) {
      auto src = in.user.row(b);
      std::copy(src.begin(), src.end(), user_rows.row(b * T + t).begin());
    }
  }
  const Var parts[] = {tape.constant(in.item),
                       tape.broadcast_rows(tape.param("position"), B, T),
                       tape.constant(std::move(user_rows)),
                       tape.constant(in.score)};
  Var x = tape.concat_last(parts);
  Var h = tape.linear(x, tape.param("input.w"), tape.param("input.b"));

  auto p = [&](const std::string& name) { return tape.param(name); };
  for (std::size_t n = 0; n < c.n_layers; ++n) {
    Var a = tape.layer_norm(h, p(block(n, "ln1.gain")), p(block(n, "ln1.bias")),
                            nn::kLayerNormEps);
    Var q = tape.linear(a, p(block(n, "attn.wq")), p(block(n, "attn.bq")));
    Var k = tape.linear(a, p(block(n, "attn.wk")), tape.constant(Tensor({c.d_model})));
    Var v = tape.linear(a, p(block(n, "attn.wv")), p(block(n, "attn.bv")));
    Var ctx = tape.causal_attention(q, k, v, c.n_heads);
    Var o = tape.linear(ctx, p(block(n, "attn.wo")), p(block(n, "attn.bo")));
    h = tape.add(h, o);
    Var a2 = tape.layer_norm(h, p(block(n, "ln2.gain")), p(block(n, "ln2.bias")),
                             nn::kLayerNormEps);
    Var f = tape.relu(tape.linear(a2, p(block(n, "ffn.w1")), p(block(n, "ffn.b1"))));
    Var f2 = tape.linear(f, p(block(n, "ffn.w2")), p(block(n, "ffn.b2")));
    h = tape.add(h, f2);
  }
  Var hf = tape.layer_norm(h, p("final_ln.gain"), p("final_ln.bias"), nn::kLayerNormEps);

  const HeadMode mode = c.head_mode;
  auto run_head = [&](Objective o) {
    Var hidden = tape.relu(tape.linear(hf, p(head(o, "w1")), p(head(o, "b1"))));
    Var logits = tape.linear(hidden, p(head(o, "w2")), p(head(o, "b2")));
    const Tensor& lv = tape.value(logits);
    Tensor probs(lv.shape());
    for (std::size_t r = 0; r < lv.rows(); ++r) {
      survival_row(lv.row(r), r % T, mode, probs.row(r));
    }
    Var result{tape.size()};
    Var pv = tape.custom(
        std::move(probs), {logits},
        [&tape, logits, result, T, mode](const Tensor& dy,
                                         std::span<Tensor* const> g) {
          if (!g[0]) return;
          const Tensor& lv = tape.value(logits);
          const Tensor& pv = tape.value(result);
          const std::size_t L = lv.last_dim();
          std::vector<double> dz(L);
          for (std::size_t r = 0; r < lv.rows(); ++r) {
            const std::size_t reachable = r % T + 1;
            auto o = lv.row(r);
            auto pr = pv.row(r);
            auto d = dy.row(r);
            auto out = g[0]->row(r);
            for (std::size_t i = 0; i < L; ++i) {
              dz[i] = i < reachable ? d[i] * pr[i] * (1.0 - pr[i]) : 0.0;
            }
            if (mode == HeadMode::kLiteral) {
              for (std::size_t i = 0; i < L; ++i) out[i] += dz[i];
              continue;
            }
            double suffix = 0.0;
            for (std::size_t i = L; i-- > 0;) {
              suffix += dz[i];
              out[i] += i == 0 ? suffix : -suffix * nn::sigmoid(o[i]);
            }
          }
        });
    return std::pair{logits, pv};
  };
  auto [cl, cp] = run_head(Objective::kClick);
  auto [pl, pp] = run_head(Objective::kPay);
  return ForwardVars{cl, pl, cp, pp};
}

PrefixState SortModel::start() const {
  PrefixState s;
  s.keys.assign(config_.n_layers, {});
  s.values.assign(config_.n_layers, {});
  s.click = SurvivalMatrix(0, config_.max_count, Objective::kClick, config_.head_mode);
  s.pay = SurvivalMatrix(0, config_.max_count, Objective::kPay, config_.head_mode);
  return s;
}

void SortModel::step_row(const PrefixState& prefix, std::span<const double> x,
                         StepResult& out) const {
  const EngineConfig& c = config_;
  const std::size_t dm = c.d_model;
  const std::size_t t = prefix.length;
  const auto& P = params_;
  auto val = [&](const std::string& name) -> const Tensor& { return P.value(name); };
  const Tensor no_key_bias({dm});

  std::vector<double> h(dm), a(dm), q(dm), ctx(dm), o(dm), hidden(4 * dm);
  nn::linear_row(x, val("input.w"), val("input.b"), h);
  out.keys.assign(c.n_layers, std::vector<double>(dm));
  out.values.assign(c.n_layers, std::vector<double>(dm));
  std::vector<double> keys;
  std::vector<double> values;
  for (std::size_t n = 0; n < c.n_layers; ++n) {
    nn::layer_norm_row(h, val(block(n, "ln1.gain")).data(),
                       val(block(n, "ln1.bias")).data(), nn::kLayerNormEps, a);
    nn::linear_row(a, val(block(n, "attn.wq")), val(block(n, "attn.bq")), q);
    nn::linear_row(a, val(block(n, "attn.wk")), no_key_bias, out.keys[n]);
    nn::linear_row(a, val(block(n, "attn.wv")), val(block(n, "attn.bv")), out.values[n]);
    keys.assign(prefix.keys[n].begin(), prefix.keys[n].end());
    keys.insert(keys.end(), out.keys[n].begin(), out.keys[n].end());
    values.assign(prefix.values[n].begin(), prefix.values[n].end());
    values.insert(values.end(), out.values[n].begin(), out.values[n].end());
    nn::attend_row(q, keys, values, t + 1, c.n_heads, ctx);
    nn::linear_row(ctx, val(block(n, "attn.wo")), val(block(n, "attn.bo")), o);
    for (std::size_t i = 0; i < dm; ++i) h[i] = h[i] + o[i];
    nn::layer_norm_row(h, val(block(n, "ln2.gain")).data(),
                       val(block(n, "ln2.bias")).data(), nn::kLayerNormEps, a);
    nn::linear_row(a, val(block(n, "ffn.w1")), val(block(n, "ffn.b1")), hidden);
    nn::relu_inplace(hidden);
    nn::linear_row(hidden, val(block(n, "ffn.w2")), val(block(n, "ffn.b2")), o);
    for (std::size_t i = 0; i < dm; ++i) h[i] = h[i] + o[i];
  }
  nn::layer_norm_row(h, val("final_ln.gain").data(), val("final_ln.bias").data(),
                     nn::kLayerNormEps, a);
  std::vector<double> head_hidden(c.head_hidden);
  auto run_head = [&](Objective obj, std::vector<double>& logits,
                      std::vector<double>& probs) {
    nn::linear_row(a, val(head(obj, "w1")), val(head(obj, "b1")), head_hidden);
    nn::relu_inplace(head_hidden);
    logits.assign(c.max_count, 0.0);
    nn::linear_row(head_hidden, val(head(obj, "w2")), val(head(obj, "b2")), logits);
    probs.assign(c.max_count, 0.0);
    survival_row(logits, t, c.head_mode, probs);
  };
  run_head(Objective::kClick, out.click_logits, out.click_probs);
  run_head(Objective::kPay, out.pay_logits, out.pay_probs);
  for (double v : out.click_logits) {
    if (!std::isfinite(v)) throw Error("forward: non-finite activation");
  }
  for (double v : out.pay_logits) {
    if (!std::isfinite(v)) throw Error("forward: non-finite activation");
  }
}

StepResult SortModel::step(const PrefixState& prefix, const UserContext& user,
                           const Item& item) const {
  if (prefix.length >= config_.l_o) {
    throw ShapeError("step: prefix already has l_o=" + std::to_string(config_.l_o) +
                     " positions");
  }
  check_item(item, config_);
  check_user(user, config_);
  StepResult out;
  step_row(prefix, input_row(item, params_.value("position").row(prefix.length), user),
           out);
  return out;
}

void SortModel::commit(PrefixState& prefix, const StepResult& s) const {
  for (std::size_t n = 0; n < config_.n_layers; ++n) {
    prefix.keys[n].insert(prefix.keys[n].end(), s.keys[n].begin(), s.keys[n].end());
    prefix.values[n].insert(prefix.values[n].end(), s.values[n].begin(),
                            s.values[n].end());
  }
  prefix.click.push_row(s.click_probs);
  prefix.pay.push_row(s.pay_probs);
  prefix.click_logits.insert(prefix.click_logits.end(), s.click_logits.begin(),
                             s.click_logits.end());
  prefix.pay_logits.insert(prefix.pay_logits.end(), s.pay_logits.begin(),
                           s.pay_logits.end());
  ++prefix.length;
}

std::vector<ListScores> SortModel::predict(const ModelInput& in) const {
  const EngineConfig& c = config_;
  if (in.length == 0 || in.length > c.l_o) {
    throw ShapeError("predict: list length must be in [1, l_o]");
  }
  const Tensor& position = params_.value("position");
  std::vector<ListScores> out;
  out.reserve(in.batch);
  std::vector<double> row(c.input_width());
  for (std::size_t b = 0; b < in.batch; ++b) {
    PrefixState state = start();
    for (std::size_t t = 0; t < in.length; ++t) {
      auto dst = row.begin();
      auto item = in.item.row(b * in.length + t);
      dst = std::copy(item.begin(), item.end(), dst);
      auto pos = position.row(t);
      dst = std::copy(pos.begin(), pos.end(), dst);
      auto user = in.user.row(b);
      dst = std::copy(user.begin(), user.end(), dst);
      auto score = in.score.row(b * in.length + t);
      std::copy(score.begin(), score.end(), dst);
      StepResult s;
      step_row(state, row, s);
      commit(state, s);
    }
    out.push_back(ListScores{std::move(state.click), std::move(state.pay),
                             std::move(state.click_logits),
                             std::move(state.pay_logits)});
  }
  return out;
}

ListScores SortModel::predict_one(std::span<const Item> pool, const SubList& list,
                                  const UserContext& user) const {
  return std::move(predict(assemble_input(pool, list, user, config_)).front());
}

nn::Var training_loss(nn::Tape& tape, const ForwardVars& out,
                      std::span<const LabelVector> labels, LossMode mode,
                      std::size_t max_count) {
  const Tensor& cp = tape.value(out.click_probs);
  const std::size_t B = cp.dim(0);
  const std::size_t T = cp.dim(1);
  if (labels.size() != B) throw ShapeError("training_loss: one label vector per list");
  for (const auto& l : labels) {
    validate_labels(l);
    if (l.size() != T) throw ShapeError("training_loss: label length mismatch");
  }
  const double inv_batch = 1.0 / static_cast<double>(B);
  const std::vector<std::size_t> shape{B, T, max_count};

  if (mode == LossMode::kOrderedRegression) {
    const Tensor& pp = tape.value(out.pay_probs);
    Tensor gc(shape), gp(shape);
    double loss = 0.0;
    for (std::size_t b = 0; b < B; ++b) {
      const auto yc = labels[b].cumulative_clicks();
      const auto yp = labels[b].cumulative_pays();
      const std::size_t off = b * T * max_count;
      const std::size_t n = T * max_count;
      loss += ordered_regression_term(cp.data().subspan(off, n), T, max_count, yc,
                                      inv_batch, gc.data().subspan(off, n));
      loss += ordered_regression_term(pp.data().subspan(off, n), T, max_count, yp,
                                      inv_batch, gp.data().subspan(off, n));
    }
    auto grads = std::make_shared<std::pair<Tensor, Tensor>>(std::move(gc), std::move(gp));
    return tape.custom(Tensor({1}, {loss}), {out.click_probs, out.pay_probs},
                       [grads](const Tensor& dy, std::span<Tensor* const> g) {
                         const Tensor* src[2] = {&grads->first, &grads->second};
                         for (int k = 0; k < 2; ++k) {
                           if (!g[k]) continue;
                           for (std::size_t i = 0; i < src[k]->size(); ++i) {
                             (*g[k])[i] += dy[0] * (*src[k])[i];
                           }
                         }
                       });
  }

  const Tensor& cl = tape.value(out.click_logits);
  const Tensor& pl = tape.value(out.pay_logits);
  Tensor gc(shape), gp(shape);
  const double scale = inv_batch / (2.0 * static_cast<double>(T));
  double loss = 0.0;
  std::vector<double> logits(T), grad(T);
  for (std::size_t b = 0; b < B; ++b) {
    for (int k = 0; k < 2; ++k) {
      const Tensor& src = k == 0 ? cl : pl;
      Tensor& dst = k == 0 ? gc : gp;
      const auto& actions = k == 0 ? labels[b].clicks : labels[b].pays;
      for (std::size_t t = 0; t < T; ++t) logits[t] = src.row(b * T + t)[0];
      std::fill(grad.begin(), grad.end(), 0.0);
      loss += pointwise_term(logits, actions, scale, grad);
      for (std::size_t t = 0; t < T; ++t) dst.row(b * T + t)[0] = grad[t];
    }
  }
  auto grads = std::make_shared<std::pair<Tensor, Tensor>>(std::move(gc), std::move(gp));
  return tape.custom(Tensor({1}, {loss}), {out.click_logits, out.pay_logits},
                     [grads](const Tensor& dy, std::span<Tensor* const> g) {
                       const Tensor* src[2] = {&grads->first, &grads->second};
                       for (int k = 0; k < 2; ++k) {
                         if (!g[k]) continue;
                         for (std::size_t i = 0; i < src[k]->size(); ++i) {
                           (*g[k])[i] += dy[0] * (*src[k])[i];
                         }
                       }
                     });
}

}  // namespace sortgen
