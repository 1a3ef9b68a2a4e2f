// Copyright 2026 The gkt-lm Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>

#include "gkt/errors.hpp"
#include "gkt/numkernel.hpp"
#include "gkt/rng.hpp"
#include "oracle.hpp"

namespace gkt {
namespace {

Matrix random_matrix(Rng& rng, int r, int c) {
  Matrix m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = rng.uniform(-1.0, 1.0);
  return m;
}

TEST(Matmul, MatchesTripleLoopOnRandomShapes) {
  Rng rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const int m = 1 + static_cast<int>(rng.below(17));
    const int k = 1 + static_cast<int>(rng.below(23));
    const int n = 1 + static_cast<int>(rng.below(19));
    const Matrix a = random_matrix(rng, m, k);
    const Matrix b = random_matrix(rng, k, n);
    const Matrix got = matmul(a, b);
    const Matrix want = testing::naive_matmul(a, b);
    ASSERT_EQ(got.rows(), m);
    ASSERT_EQ(got.cols(), n);
    EXPECT_LT((got - want).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Matmul, ShapeMismatchNamesBothShapes) {
  const Matrix a = Matrix::Zero(2, 3);
  const Matrix b = Matrix::Zero(4, 5);
  try {
    matmul(a, b);
    FAIL() << "expected DimensionError";
  } catch (const DimensionError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("2x3"), std::string::npos) << msg;
    EXPECT_NE(msg.find("4x5"), std::string::npos) << msg;
  }
}

TEST(Softmax, SumsToOneAndOrdersLikeLogits) {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    Vector z(30);
    for (int k = 0; k < 30; ++k) z(k) = rng.uniform(-20.0, 20.0);
    const Vector p = softmax(z);
    EXPECT_NEAR(p.sum(), 1.0, 1e-12);
    EXPECT_GE(p.minCoeff(), 0.0);
    Eigen::Index iz, ip;
    z.maxCoeff(&iz);
    p.maxCoeff(&ip);
    EXPECT_EQ(iz, ip);
  }
}

TEST(Softmax, StableForHugeLogits) {
  Vector z(3);
  z << 1000.0, 1000.0, -1000.0;
  const Vector p = softmax(z);
  EXPECT_NEAR(p(0), 0.5, 1e-15);
  EXPECT_NEAR(p(1), 0.5, 1e-15);
  EXPECT_EQ(p(2), 0.0);
  EXPECT_TRUE(p.allFinite());
}

TEST(Softmax, RowsAreIndependent) {
  Matrix z(2, 3);
  z << 0.0, 1.0, 2.0, 5.0, 5.0, 5.0;
  softmax_rows(z);
  EXPECT_NEAR(z.row(1).sum(), 1.0, 1e-15);
  EXPECT_NEAR(z(1, 0), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(z(0, 2) / z(0, 1), std::exp(1.0), 1e-12);
}

TEST(Sigmoid, ExtremesAndSymmetry) {
  EXPECT_EQ(sigmoid(0.0), 0.5);
  EXPECT_NEAR(sigmoid(3.0) + sigmoid(-3.0), 1.0, 1e-15);
  EXPECT_TRUE(std::isfinite(sigmoid(-1000.0)));
  EXPECT_NEAR(sigmoid(800.0), 1.0, 1e-15);
}

TEST(RequireFinite, ThrowsOnNaN) {
  Matrix m = Matrix::Zero(2, 2);
  EXPECT_NO_THROW(require_finite(m, "m"));
  m(1, 0) = std::nan("");
  EXPECT_THROW(require_finite(m, "m"), NumericalError);
}

TEST(LstmCell, UniformInitHasForgetBiasAndBoundedWeights) {
  Rng rng(3);
  const LstmCellParams p = LstmCellParams::uniform(8, 30, rng, 0.08, 1.0);
  EXPECT_EQ(p.w_input.rows(), 32);
  EXPECT_EQ(p.w_recurrent.cols(), 8);
  EXPECT_LE(p.w_input.cwiseAbs().maxCoeff(), 0.08);
  EXPECT_LE(p.w_recurrent.cwiseAbs().maxCoeff(), 0.08);
  for (int j = 0; j < 8; ++j) {
    EXPECT_EQ(p.bias_block(Gate::kForget)(j), 1.0);
    EXPECT_EQ(p.bias_block(Gate::kInput)(j), 0.0);
  }
  EXPECT_EQ(p.size(), 32u * 30u + 32u * 8u + 32u);
}

TEST(LstmCell, BatchedForwardMatchesScalarOracle) {
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const int cells = 1 + static_cast<int>(rng.below(9));
    const int in = 1 + static_cast<int>(rng.below(12));
    const int batch = 1 + static_cast<int>(rng.below(4));
    LstmCellParams p = LstmCellParams::uniform(cells, in, rng, 0.7, 0.3);
    p.bias = Vector::NullaryExpr(4 * cells, [&](Eigen::Index) { return rng.uniform(-1.0, 1.0); });
    LstmCellState s;
    s.c = random_matrix(rng, batch, cells);
    s.h = random_matrix(rng, batch, cells);
    const Matrix x = random_matrix(rng, batch, in);
    const LstmCellState next = lstm_cell_forward(p, x, s);
    for (int b = 0; b < batch; ++b) {
      std::vector<double> xv(x.row(b).data(), x.row(b).data() + in);
      std::vector<double> h(s.h.row(b).data(), s.h.row(b).data() + cells);
      std::vector<double> c(s.c.row(b).data(), s.c.row(b).data() + cells);
      testing::scalar_lstm_step(p, xv, h, c);
      for (int j = 0; j < cells; ++j) {
        EXPECT_NEAR(next.h(b, j), h[j], 1e-13);
        EXPECT_NEAR(next.c(b, j), c[j], 1e-13);
      }
    }
  }
}

TEST(LstmCell, ForwardRejectsMismatchedInput) {
  Rng rng(1);
  const LstmCellParams p = LstmCellParams::uniform(4, 6, rng);
  const LstmCellState s = LstmCellState::zeros(2, 4);
  EXPECT_THROW(lstm_cell_forward(p, Matrix::Zero(2, 5), s), DimensionError);
  EXPECT_THROW(lstm_cell_forward(p, Matrix::Zero(3, 6), s), DimensionError);
}

// Scalar objective sum(wh .* h') + sum(wc .* c') for a backward check.
TEST(LstmCell, BackwardMatchesFiniteDifferences) {
  Rng rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    const int cells = 1 + static_cast<int>(rng.below(4));
    const int in = 1 + static_cast<int>(rng.below(4));
    const int batch = 1 + static_cast<int>(rng.below(3));
    LstmCellParams p = LstmCellParams::uniform(cells, in, rng, 0.8, 0.5);
    LstmCellState s;
    s.c = random_matrix(rng, batch, cells);
    s.h = random_matrix(rng, batch, cells);
    const Matrix x = random_matrix(rng, batch, in);
    const Matrix wh = random_matrix(rng, batch, cells);
    const Matrix wc = random_matrix(rng, batch, cells);

    LstmTape tape;
    lstm_cell_forward(p, x, s, &tape);
    LstmCellParams grads = LstmCellParams::zeros(cells, in);
    const LstmInputGrads ig = lstm_cell_backward(p, tape, wh, wc, grads);

    // Pack [w_input, w_recurrent, bias, x, h, c] into one vector.
    std::vector<double> theta;
    auto push = [&](const auto& m) {
      for (Eigen::Index i = 0; i < m.size(); ++i) theta.push_back(m.data()[i]);
    };
    push(p.w_input);
    push(p.w_recurrent);
    push(p.bias);
    push(x);
    push(s.h);
    push(s.c);
    auto objective = [&](std::span<const double> t) {
      LstmCellParams q = p;
      Matrix xx = x;
      LstmCellState ss = s;
      std::size_t off = 0;
      auto pull = [&](auto& m) {
        for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = t[off++];
      };
      pull(q.w_input);
      pull(q.w_recurrent);
      pull(q.bias);
      pull(xx);
      pull(ss.h);
      pull(ss.c);
      const LstmCellState n = lstm_cell_forward(q, xx, ss);
      return (n.h.array() * wh.array()).sum() + (n.c.array() * wc.array()).sum();
    };
    const auto fd = finite_diff_grad(objective, theta, 1e-5);
    std::vector<double> analytic;
    auto take = [&](const auto& m) {
      for (Eigen::Index i = 0; i < m.size(); ++i) analytic.push_back(m.data()[i]);
    };
    take(grads.w_input);
    take(grads.w_recurrent);
    take(grads.bias);
    take(ig.dx);
    take(ig.dh_prev);
    take(ig.dc_prev);
    ASSERT_EQ(fd.size(), analytic.size());
    for (std::size_t k = 0; k < fd.size(); ++k) {
      EXPECT_LT(relative_error(analytic[k], fd[k]), 1e-4) << "coordinate " << k;
    }
  }
}

TEST(FiniteDiff, QuadraticIsExact) {
  const std::vector<double> theta = {1.0, -2.0, 0.5};
  auto f = [](std::span<const double> t) { return 3.0 * t[0] * t[0] + t[1] * t[2]; };
  const auto g = finite_diff_grad(f, theta, 1e-4);
  EXPECT_NEAR(g[0], 6.0, 1e-8);
  EXPECT_NEAR(g[1], 0.5, 1e-8);
  EXPECT_NEAR(g[2], -2.0, 1e-8);
  EXPECT_THROW(finite_diff_grad(f, theta, 0.0), ConfigError);
}

TEST(RelativeError, UsesFloorNearZero) {
  EXPECT_EQ(relative_error(0.0, 0.0), 0.0);
  EXPECT_NEAR(relative_error(1e-12, 0.0), 1e-4, 1e-18);
  EXPECT_NEAR(relative_error(2.0, 1.0), 0.5, 1e-15);
}

}  // namespace
}  // namespace gkt
