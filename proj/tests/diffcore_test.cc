// Copyright 2026 The STRelay Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "strelay/diffcore.h"

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "fd_oracle.h"

namespace strelay::ad {
namespace {

using testing::fd;
using testing::max_fd_error;
using testing::probe;
using testing::rel_err;

TEST(ParamStore, InitRangeAndNames) {
  Rng rng(1);
  ParamStore ps;
  Tensor& w = ps.add_uniform("w", 5, 3, 4, rng);
  EXPECT_EQ(w.size(), 15u);
  for (double v : w.value) EXPECT_LE(std::abs(v), 0.5);
  ps.add_zeros("b", 1, 3);
  EXPECT_EQ(ps.num_scalars(), 18u);
  EXPECT_THROW(ps.add_zeros("w", 1, 1), Error);
  EXPECT_THROW(ps.get("missing"), Error);
  EXPECT_THROW(ps.add_zeros("z", 0, 2), ShapeError);
  // Iteration follows name order.
  EXPECT_EQ(ps.tensors().begin()->first, "b");
}

TEST(Embed, LookupScatterAndBound) {
  Rng rng(2);
  ParamStore ps;
  Tensor& table = ps.add_uniform("t", 5, 3, 3, rng);
  Tape tape;
  const Var row = embed(tape, tape.param(table), 2);
  const auto v = tape.value(row);
  for (int j = 0; j < 3; ++j) EXPECT_EQ(v[j], table.at(2, j));
  const Var loss = matmul(tape, row, tape.constant(3, 1, {1.0, -2.0, 0.5}));
  tape.backward(loss);
  for (int r = 0; r < 5; ++r) {
    for (int j = 0; j < 3; ++j) {
      const double expect = r == 2 ? std::vector{1.0, -2.0, 0.5}[j] : 0.0;
      EXPECT_EQ(table.grad[r * 3 + j], expect);
    }
  }
  EXPECT_THROW(embed(tape, tape.param(table), 5), ShapeError);
  EXPECT_THROW(embed(tape, tape.param(table), -1), ShapeError);
}

TEST(Ops, ShapeMismatchesThrow) {
  Tape tape;
  const Var a = tape.constant(2, 3, std::vector<double>(6, 1.0));
  const Var b = tape.constant(2, 2, std::vector<double>(4, 1.0));
  EXPECT_THROW(matmul(tape, a, b), ShapeError);
  EXPECT_THROW(add(tape, a, b), ShapeError);
  EXPECT_THROW(matmul_nt(tape, a, b), ShapeError);
  EXPECT_THROW(concat(tape, {a, b}), ShapeError);
  EXPECT_THROW(tape.constant(2, 2, {1.0}), ShapeError);
}

TEST(Softmax, PositiveAndNormalized) {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> x(12);
    for (double& v : x) v = rng.uniform(-30, 30);
    Tape tape(false);
    const auto y = tape.value(softmax(tape, tape.constant(3, 4, x)));
    for (int r = 0; r < 3; ++r) {
      double s = 0;
      for (int c = 0; c < 4; ++c) {
        EXPECT_GT(y[r * 4 + c], 0.0);
        s += y[r * 4 + c];
      }
      EXPECT_NEAR(s, 1.0, 1e-12);
    }
  }
}

TEST(CrossEntropy, ClosedFormsAndStability) {
  Tape tape(false);
  const Var flat = tape.constant(1, 8, std::vector<double>(8, 0.37));
  EXPECT_NEAR(tape.scalar(cross_entropy(tape, flat, 3)), 2.079442, 1e-6);
  EXPECT_NEAR(tape.scalar(cross_entropy(tape, flat, 3)), std::log(8.0), 1e-12);
  std::vector<double> x(8, 0.0);
  x[5] = 1000.0;
  const double l = tape.scalar(cross_entropy(tape, tape.constant(1, 8, x), 5));
  EXPECT_TRUE(std::isfinite(l));
  EXPECT_LT(l, 1e-12);
  const double far =
      tape.scalar(cross_entropy(tape, tape.constant(1, 8, x), 0));
  EXPECT_NEAR(far, 1000.0, 1e-9);
  EXPECT_THROW(cross_entropy(tape, flat, 8), ShapeError);
}

TEST(CrossEntropy, GradientIsSoftmaxMinusOneHot) {
  Rng rng(4);
  ParamStore ps;
  Tensor& logits = ps.add_uniform("x", 1, 7, 1, rng);
  const int target = 4;
  auto build = [&](Tape& t) {
    return cross_entropy(t, t.param(logits), target);
  };
  {
    Tape tape;
    tape.backward(build(tape));
  }
  double z = 0;
  for (double v : logits.value) z += std::exp(v);
  for (int j = 0; j < 7; ++j) {
    const double p = std::exp(logits.value[j]) / z;
    EXPECT_NEAR(logits.grad[j], p - (j == target ? 1.0 : 0.0), 1e-12);
  }
  EXPECT_LT(max_fd_error(ps, build), 1e-6);
}

TEST(Attention, SingleCandidateAndUniformWeights) {
  Rng rng(5);
  ParamStore ps;
  Tensor& wq = ps.add_uniform("wq", 3, 4, 3, rng);
  Tensor& wk = ps.add_uniform("wk", 4, 4, 4, rng);
  Tensor& wv = ps.add_uniform("wv", 4, 4, 4, rng);
  Tape tape;
  const Var q = tape.constant(1, 3, {0.2, -0.4, 0.9});
  const Var one = tape.constant(1, 4, {1, 2, 3, 4});
  const AttentionOut a = attention(tape, q, one, one, tape.param(wq),
                                   tape.param(wk), tape.param(wv));
  EXPECT_EQ(tape.value(a.weights)[0], 1.0);
  const auto out = tape.value(a.output);
  for (int j = 0; j < 4; ++j) {
    double v = 0;
    for (int k = 0; k < 4; ++k) v += (k + 1) * wv.at(k, j);
    EXPECT_NEAR(out[j], v, 1e-12);
  }

  std::vector<double> same;
  for (int r = 0; r < 5; ++r) same.insert(same.end(), {0.5, -1, 2, 0.1});
  std::vector<double> vals(20);
  std::iota(vals.begin(), vals.end(), 0.0);
  const AttentionOut u =
      attention(tape, q, tape.constant(5, 4, same), tape.constant(5, 4, vals),
                tape.param(wq), tape.param(wk), tape.param(wv));
  for (double w : tape.value(u.weights)) EXPECT_NEAR(w, 0.2, 1e-15);
}

TEST(Attention, QueryProjectionGradientMatchesFd) {
  Rng rng(6);
  ParamStore ps;
  Tensor& wq = ps.add_uniform("wq", 3, 4, 3, rng);
  Tensor& wk = ps.add_uniform("wk", 4, 4, 4, rng);
  Tensor& wv = ps.add_uniform("wv", 4, 4, 4, rng);
  Tensor& keys = ps.add_uniform("keys", 3, 4, 1, rng);
  auto build = [&](Tape& t) {
    const Var q = t.constant(1, 3, {0.7, -0.2, 1.1});
    const AttentionOut a =
        attention(t, q, t.param(keys), t.param(keys), t.param(wq),
                  t.param(wk), t.param(wv));
    return probe(t, a.output);
  };
  ps.zero_grad();
  {
    Tape tape;
    tape.backward(build(tape));
  }
  auto eval = [&] {
    Tape t(false);
    return t.scalar(build(t));
  };
  for (size_t i = 0; i < wq.size(); ++i) {
    EXPECT_LT(rel_err(wq.grad[i], fd(wq, i, eval)), 1e-5) << i;
  }
  EXPECT_LT(max_fd_error(ps, build), 1e-4);
}

TEST(Mlp, NullAndIdentityMaps) {
  ParamStore ps;
  Tensor& w = ps.add_zeros("w", 4, 3);
  Tensor& b = ps.add_zeros("b", 1, 3);
  Tape tape;
  const Var x = tape.constant(1, 4, {1, -2, 3, 0.5});
  const std::vector<Dense> zero = {{tape.param(w), tape.param(b)}};
  for (double v : tape.value(mlp(tape, x, zero))) EXPECT_EQ(v, 0.0);

  Tensor& id = ps.add_zeros("id", 4, 4);
  Tensor& idb = ps.add_zeros("idb", 1, 4);
  for (int i = 0; i < 4; ++i) id.at(i, i) = 1.0;
  const std::vector<Dense> ident = {{tape.param(id), tape.param(idb)}};
  const auto y = tape.value(mlp(tape, x, ident));
  const auto xv = tape.value(x);
  for (int i = 0; i < 4; ++i) EXPECT_EQ(y[i], xv[i]);
}

TEST(Mlp, TwoLayerGradientMatchesFd) {
  Rng rng(7);
  ParamStore ps;
  Tensor& w0 = ps.add_uniform("w0", 4, 8, 4, rng);
  Tensor& b0 = ps.add_uniform("b0", 1, 8, 4, rng);
  Tensor& w1 = ps.add_uniform("w1", 8, 3, 8, rng);
  Tensor& b1 = ps.add_uniform("b1", 1, 3, 8, rng);
  Tensor& x = ps.add_uniform("x", 1, 4, 1, rng);
  auto build = [&](Tape& t) {
    const std::vector<Dense> layers = {{t.param(w0), t.param(b0)},
                                       {t.param(w1), t.param(b1)}};
    return cross_entropy(t, mlp(t, t.param(x), layers), 2);
  };
  EXPECT_LT(max_fd_error(ps, build), 1e-6);
}

// A graph touching every op, checked against the reference differences.
TEST(Backward, ComposedGraphMatchesFd) {
  for (uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed);
    ParamStore ps;
    Tensor& table = ps.add_uniform("table", 6, 3, 1, rng);
    Tensor& w = ps.add_uniform("w", 6, 3, 6, rng);
    Tensor& bias = ps.add_uniform("bias", 1, 3, 1, rng);
    Tensor& m = ps.add_uniform("m", 2, 3, 1, rng);
    auto build = [&](Tape& t) {
      const Var tv = t.param(table);
      const Var a = embed(t, tv, 1);
      const Var b = embed(t, tv, 4);
      const Var c = concat(t, {a, b});                            // 1 x 6
      const Var h = tanh(t, add_bias(t, matmul(t, c, t.param(w)),
                                     t.param(bias)));             // 1 x 3
      const Var g = sigmoid(t, sub(t, h, scale(t, a, 0.5)));
      const Var k = mul(t, g, h);
      const Var s = matmul_nt(t, k, t.param(m));                  // 1 x 2
      const std::vector<Var> parts = {k, a, b};
      const std::vector<double> ws = {0.3, -1.2, 0.8};
      const Var ws_sum = weighted_sum(t, parts, ws);
      const Var both = add(t, ws_sum, sum(t, parts));
      const Var sm = softmax(t, concat(t, {s, both}));            // 1 x 5
      return add(t, probe(t, sm), cross_entropy(t, both, 1));
    };
    EXPECT_LT(max_fd_error(ps, build), 1e-4) << "seed " << seed;
  }
}

TEST(Backward, RepeatedForwardIsBitIdentical) {
  Rng rng(8);
  ParamStore ps;
  Tensor& w = ps.add_uniform("w", 3, 3, 3, rng);
  auto run = [&] {
    Tape t;
    const Var x = t.constant(1, 3, {0.1, 0.2, 0.3});
    const Var y = softmax(t, tanh(t, matmul(t, x, t.param(w))));
    return std::vector<double>(t.value(y).begin(), t.value(y).end());
  };
  EXPECT_EQ(run(), run());
}

TEST(GradCheck, QuadraticIsExact) {
  Rng rng(9);
  ParamStore ps;
  Tensor& w = ps.add_uniform("w", 3, 4, 1, rng);
  auto norm2 = [&](Tape& t) {
    const Var v = t.param(w);
    const Var rows = matmul(t, t.constant(1, 3, {1, 1, 1}), mul(t, v, v));
    return matmul(t, rows, t.constant(4, 1, {1, 1, 1, 1}));
  };
  const GradCheckResult r = grad_check(LossFn(norm2), ps);
  EXPECT_LT(r.max_rel_error, 1e-9);
  EXPECT_EQ(r.entries_checked, 12u);
  for (size_t i = 0; i < w.size(); ++i) {
    EXPECT_NEAR(w.grad[i], 2 * w.value[i], 1e-15);
  }
}

TEST(GradCheck, ConstantLossHasZeroGradients) {
  Rng rng(10);
  ParamStore ps;
  Tensor& w = ps.add_uniform("w", 2, 2, 1, rng);
  const GradCheckResult r = grad_check(
      LossFn([](Tape& t) { return t.constant(1, 1, {3.5}); }), ps);
  EXPECT_EQ(r.max_rel_error, 0.0);
  for (double g : w.grad) EXPECT_EQ(g, 0.0);
}

TEST(GradCheck, NonFiniteLossThrows) {
  Rng rng(11);
  ParamStore ps;
  Tensor& w = ps.add_uniform("w", 1, 1, 1, rng);
  w.value[0] = -1.0;
  auto loss = [&](Tape& t) {
    // sqrt of a negative via an emitted op.
    const Var v = t.param(w);
    return t.emit(1, 1, {std::sqrt(t.value(v)[0])}, {v}, {});
  };
  EXPECT_THROW(grad_check(LossFn(loss), ps), NumericError);
}

TEST(GradCheck, TermwiseAgreesWithScalarForm) {
  Rng rng(12);
  ParamStore ps;
  Tensor& w = ps.add_uniform("w", 3, 5, 3, rng);
  auto terms = [&](Tape& t) {
    std::vector<Var> out;
    for (int target = 0; target < 4; ++target) {
      const Var x = t.constant(1, 3, {0.1 * target, -0.5, 1.0});
      out.push_back(cross_entropy(t, matmul(t, x, t.param(w)), target));
    }
    return out;
  };
  const GradCheckResult a = grad_check(LossTermsFn(terms), ps);
  const std::vector<double> grad_a = w.grad;
  const GradCheckResult b = grad_check(
      LossFn([&](Tape& t) { return sum(t, terms(t)); }), ps);
  EXPECT_EQ(grad_a, w.grad);
  EXPECT_LT(a.max_rel_error, 1e-6);
  EXPECT_LT(b.max_rel_error, 1e-6);
}

}  // namespace
}  // namespace strelay::ad
