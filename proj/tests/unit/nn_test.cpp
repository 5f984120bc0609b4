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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "sortgen/kernels.hpp"
#include "sortgen/params.hpp"
#include "sortgen/tape.hpp"
#include "sortgen/tensor.hpp"
#include "sortgen/types.hpp"

namespace sortgen::nn {
namespace {

Tensor random_tensor(std::vector<std::size_t> shape, std::mt19937_64& rng,
                     double scale = 1.0) {
  Tensor t(std::move(shape));
  std::uniform_real_distribution<double> u(-scale, scale);
  for (double& v : t.data()) v = u(rng);
  return t;
}

Tensor identity(std::size_t rows, std::size_t cols) {
  Tensor t({rows, cols});
  for (std::size_t i = 0; i < std::min(rows, cols); ++i) t.at({i, i}) = 1.0;
  return t;
}

struct AttentionWeights {
  Tensor wq, bq, wk, bk, wv, bv, wo, bo;
  AttentionParams view() const { return {wq, bq, wk, bk, wv, bv, wo, bo}; }
};

AttentionWeights random_attention(std::size_t d, std::mt19937_64& rng) {
  return {random_tensor({d, d}, rng), random_tensor({d}, rng),
          random_tensor({d, d}, rng), random_tensor({d}, rng),
          random_tensor({d, d}, rng), random_tensor({d}, rng),
          random_tensor({d, d}, rng), random_tensor({d}, rng)};
}

TEST(Linear, IdentityWeights) {
  const Tensor y = linear(Tensor({1, 2}, {1, 2}), identity(2, 2), Tensor({2}));
  EXPECT_EQ(y, Tensor({1, 2}, {1, 2}));
}

TEST(Linear, HandArithmetic) {
  const Tensor y = linear(Tensor({1, 2}, {1, 1}), Tensor({2, 2}, {2, 0, 0, 3}),
                          Tensor({2}, {1, 1}));
  EXPECT_EQ(y, Tensor({1, 2}, {3, 4}));
}

TEST(Linear, ZeroInputGivesBias) {
  std::mt19937_64 rng(1);
  const Tensor b = random_tensor({3}, rng);
  const Tensor y = linear(Tensor({2, 2, 4}), random_tensor({4, 3}, rng), b);
  for (std::size_t r = 0; r < y.rows(); ++r) {
    for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(y.row(r)[k], b[k]);
  }
}

TEST(Linear, ShapeMismatchThrows) {
  EXPECT_THROW(linear(Tensor({1, 3}), Tensor({2, 2}), Tensor({2})), ShapeError);
}

TEST(LayerNorm, ConstantRowNormalizesToZero) {
  const Tensor y = layer_norm(Tensor({3}, {3, 3, 3}), Tensor({3}, 1.0), Tensor({3}));
  for (double v : y.data()) EXPECT_EQ(v, 0.0);
}

TEST(LayerNorm, UnitVarianceRowPreserved) {
  const Tensor y = layer_norm(Tensor({2}, {1, -1}), Tensor({2}, 1.0), Tensor({2}));
  EXPECT_NEAR(y[0], 1.0, 1e-4);
  EXPECT_NEAR(y[1], -1.0, 1e-4);
  // Exact value with eps in the denominator.
  EXPECT_DOUBLE_EQ(y[0], 1.0 / std::sqrt(1.0 + kLayerNormEps));
}

TEST(LayerNorm, ZeroGainGivesBias) {
  std::mt19937_64 rng(2);
  const Tensor bias = random_tensor({5}, rng);
  const Tensor y = layer_norm(random_tensor({4, 5}, rng), Tensor({5}), bias);
  for (std::size_t r = 0; r < 4; ++r) {
    for (std::size_t k = 0; k < 5; ++k) EXPECT_EQ(y.row(r)[k], bias[k]);
  }
}

TEST(LayerNorm, RejectsWidthOne) {
  EXPECT_THROW(layer_norm(Tensor({2, 1}), Tensor({1}), Tensor({1})), ShapeError);
}

TEST(CausalMhsa, SinglePositionIsValueThenOutputProjection) {
  std::mt19937_64 rng(3);
  const AttentionWeights w = random_attention(4, rng);
  const Tensor x = random_tensor({2, 1, 4}, rng);
  const Tensor got = causal_mhsa(x, w.view(), 2);
  const Tensor want = linear(linear(x, w.wv, w.bv), w.wo, w.bo);
  ASSERT_EQ(got.shape(), want.shape());
  for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-12);
}

TEST(CausalMhsa, LaterPositionsDoNotLeakBackwards) {
  std::mt19937_64 rng(4);
  const AttentionWeights w = random_attention(6, rng);
  Tensor x = random_tensor({1, 5, 6}, rng);
  const Tensor before = causal_mhsa(x, w.view(), 3);
  for (std::size_t k = 0; k < 6; ++k) x.at({0, 4, k}) += 1.5;
  const Tensor after = causal_mhsa(x, w.view(), 3);
  for (std::size_t t = 0; t < 4; ++t) {
    for (std::size_t k = 0; k < 6; ++k) {
      EXPECT_EQ(before.at({0, t, k}), after.at({0, t, k}));
    }
  }
  bool changed = false;
  for (std::size_t k = 0; k < 6; ++k) changed |= before.at({0, 4, k}) != after.at({0, 4, k});
  EXPECT_TRUE(changed);
}

TEST(CausalMhsa, ZeroQueriesAverageVisibleValues) {
  std::mt19937_64 rng(5);
  AttentionWeights w = random_attention(4, rng);
  w.wq.fill(0.0);
  w.bq.fill(0.0);
  w.wo = identity(4, 4);
  w.bo.fill(0.0);
  const Tensor x = random_tensor({1, 3, 4}, rng);
  const Tensor v = linear(x, w.wv, w.bv);
  const Tensor y = causal_mhsa(x, w.view(), 2);
  for (std::size_t t = 0; t < 3; ++t) {
    for (std::size_t k = 0; k < 4; ++k) {
      double mean = 0.0;
      for (std::size_t s = 0; s <= t; ++s) mean += v.at({0, s, k});
      mean /= static_cast<double>(t + 1);
      EXPECT_NEAR(y.at({0, t, k}), mean, 1e-12);
    }
  }
}

TEST(CausalMhsa, HeadsMustDivideWidth) {
  std::mt19937_64 rng(6);
  const AttentionWeights w = random_attention(4, rng);
  EXPECT_THROW(causal_mhsa(random_tensor({1, 2, 4}, rng), w.view(), 3), ShapeError);
}

TEST(Ffn, ZeroWeightsGiveZero) {
  std::mt19937_64 rng(7);
  const Tensor w1({4, 16}), b1({16}), w2({16, 4}), b2({4});
  const Tensor y = ffn(random_tensor({2, 3, 4}, rng), {w1, b1, w2, b2});
  for (double v : y.data()) EXPECT_EQ(v, 0.0);
}

TEST(Ffn, PaddedIdentityReproducesNonNegativeInput) {
  std::mt19937_64 rng(8);
  Tensor x = random_tensor({2, 3, 4}, rng);
  for (double& v : x.data()) v = std::abs(v);
  const Tensor y = ffn(x, {identity(4, 16), Tensor({16}), identity(16, 4), Tensor({4})});
  EXPECT_EQ(y, x);
}

TEST(Ffn, NegativePreActivationClampsToZero) {
  const Tensor x({1, 2}, {-1.0, -2.0});
  const Tensor y = ffn(x, {identity(2, 8), Tensor({8}), identity(8, 2), Tensor({2}, 0.25)});
  EXPECT_EQ(y, Tensor({1, 2}, {0.25, 0.25}));
}

TEST(Backward, SumOfWeightsGivesOnes) {
  std::mt19937_64 rng(9);
  ParamStore p;
  p.add("w", random_tensor({3, 2}, rng));
  Tape tape(p);
  tape.backward(tape.sum(tape.param("w")), p);
  for (double g : p.grad("w").data()) EXPECT_EQ(g, 1.0);
  // A second backward accumulates.
  tape.backward(tape.sum(tape.param("w")), p);
  for (double g : p.grad("w").data()) EXPECT_EQ(g, 2.0);
}

TEST(Backward, ZeroScaledLossGivesZeroGradients) {
  std::mt19937_64 rng(10);
  ParamStore p;
  p.add("w", random_tensor({3, 2}, rng));
  p.add("b", random_tensor({2}, rng));
  Tape tape(p);
  const Var x = tape.constant(random_tensor({4, 3}, rng));
  const Var y = tape.linear(x, tape.param("w"), tape.param("b"));
  tape.backward(tape.scale(tape.sum(y), 0.0), p);
  for (const auto& [name, param] : p) {
    for (double g : param.grad.data()) EXPECT_EQ(g, 0.0);
  }
}

TEST(Backward, UnrecordedLossThrows) {
  ParamStore p;
  p.add("w", Tensor({1}));
  Tape tape(p);
  EXPECT_THROW(tape.backward(Var{}, p), Error);
}

// A small net touching every tape op the model uses.
double small_net_loss(ParamStore& p, const Tensor& input) {
  Tape tape(p);
  const Var x = tape.constant(input);
  const Var pos = tape.broadcast_rows(tape.param("pos"), 2, 3);
  const Var parts[] = {x, pos};
  const Var h = tape.linear(tape.concat_last(parts), tape.param("w_in"), tape.param("b_in"));
  const Var n = tape.layer_norm(h, tape.param("gain"), tape.param("bias"), kLayerNormEps);
  const Var q = tape.linear(n, tape.param("wq"), tape.param("bq"));
  // A key bias would have an identically zero gradient (softmax ignores a
  // per-query shift), which finite differences only see as rounding noise.
  const Var k = tape.linear(n, tape.param("wk"), tape.constant(Tensor({4})));
  const Var v = tape.linear(n, tape.param("wv"), tape.param("bv"));
  const Var a = tape.add(h, tape.causal_attention(q, k, v, 2));
  const Var r = tape.relu(tape.linear(a, tape.param("w1"), tape.param("b1")));
  const Var out = tape.linear(r, tape.param("w2"), tape.param("b2"));
  // Squaring through a custom op keeps the loss non-linear in the last layer.
  const Tensor& ov = tape.value(out);
  Tensor sq(ov.shape());
  for (std::size_t i = 0; i < ov.size(); ++i) sq[i] = ov[i] * ov[i];
  const Var squared = tape.custom(std::move(sq), {out},
                                  [ov](const Tensor& g, std::span<Tensor* const> in) {
                                    if (!in[0]) return;
                                    for (std::size_t i = 0; i < g.size(); ++i) {
                                      (*in[0])[i] += 2.0 * ov[i] * g[i];
                                    }
                                  });
  const Var loss = tape.scale(tape.sum(squared), 0.5);
  tape.backward(loss, p);
  return tape.value(loss)[0];
}

TEST(Backward, SmallNetMatchesFiniteDifferences) {
  std::mt19937_64 rng(11);
  ParamStore p;
  p.add("pos", random_tensor({3, 2}, rng));
  p.add("w_in", random_tensor({5, 4}, rng));
  p.add("b_in", random_tensor({4}, rng));
  p.add("gain", random_tensor({4}, rng));
  p.add("bias", random_tensor({4}, rng));
  for (const char* n : {"q", "k", "v"}) p.add(std::string("w") + n, random_tensor({4, 4}, rng));
  p.add("bq", random_tensor({4}, rng));
  p.add("bv", random_tensor({4}, rng));
  p.add("w1", random_tensor({4, 6}, rng));
  p.add("b1", random_tensor({6}, rng));
  p.add("w2", random_tensor({6, 2}, rng));
  p.add("b2", random_tensor({2}, rng));
  const Tensor input = random_tensor({2, 3, 3}, rng);
  const double err = finite_diff_check(
      p, [&](ParamStore& ps) { return small_net_loss(ps, input); }, 1e-5, 1000);
  EXPECT_LT(err, 1e-4);
}

TEST(FiniteDiff, QuadraticIsExact) {
  std::mt19937_64 rng(12);
  ParamStore p;
  p.add("w", random_tensor({8, 8}, rng));
  auto half_norm = [](ParamStore& ps) {
    const Tensor& w = ps.value("w");
    double loss = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      loss += 0.5 * w[i] * w[i];
      ps.grad("w")[i] += w[i];
    }
    return loss;
  };
  EXPECT_LT(finite_diff_check(p, half_norm, 1e-4, 64), 1e-9);
}

TEST(FiniteDiff, ZeroStepIsAnError) {
  ParamStore p;
  p.add("w", Tensor({2}, 1.0));
  EXPECT_THROW(finite_diff_check(p, [](ParamStore&) { return 0.0; }, 0.0), Error);
}

TEST(FiniteDiff, NonFiniteLossIsAnError) {
  ParamStore p;
  p.add("w", Tensor({2}, 1.0));
  EXPECT_THROW(finite_diff_check(p, [](ParamStore&) { return std::nan(""); }, 1e-4),
               Error);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  ParamStore p;
  p.add("w", Tensor({3}, 2.0));
  AdamState s;
  s.learning_rate = 0.1;
  s.init(p);
  p.grad("w").fill(1.0);
  adam_step(p, s);
  for (double v : p.value("w").data()) EXPECT_NEAR(v - 2.0, -0.1, 1e-8);
  for (double g : p.grad("w").data()) EXPECT_EQ(g, 0.0);
}

TEST(Adam, ZeroGradientLeavesParameters) {
  std::mt19937_64 rng(13);
  ParamStore p;
  p.add("w", random_tensor({4, 4}, rng));
  const ParamStore before = p;
  AdamState s;
  s.init(p);
  for (int i = 0; i < 5; ++i) adam_step(p, s);
  EXPECT_EQ(p.value("w"), before.value("w"));
}

TEST(Adam, ConstantGradientDescends) {
  ParamStore p;
  p.add("w", Tensor({2}, {0.0, 0.0}));
  AdamState s;
  s.learning_rate = 0.01;
  s.init(p);
  for (int i = 0; i < 50; ++i) {
    p.grad("w")[0] = 3.0;
    p.grad("w")[1] = -0.5;
    adam_step(p, s);
  }
  EXPECT_LT(p.value("w")[0], 0.0);
  EXPECT_GT(p.value("w")[1], 0.0);
  EXPECT_EQ(s.step, 50u);
}

TEST(Adam, UninitializedStateThrows) {
  ParamStore p;
  p.add("w", Tensor({1}));
  AdamState s;
  EXPECT_THROW(adam_step(p, s), Error);
}

TEST(ParamStore, DuplicateNameThrows) {
  ParamStore p;
  p.add("w", Tensor({1}));
  EXPECT_THROW(p.add("w", Tensor({1})), Error);
}

}  // namespace
}  // namespace sortgen::nn
