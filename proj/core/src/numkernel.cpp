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

#include "gkt/numkernel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gkt/errors.hpp"

namespace gkt {

std::string shape_of(const Matrix& m) {
  std::ostringstream os;
  os << m.rows() << "x" << m.cols();
  return os.str();
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: cannot multiply " + shape_of(a) + " by " + shape_of(b));
  }
  Matrix out(a.rows(), b.cols());
  out.noalias() = a * b;
  return out;
}

Vector softmax(const Vector& z) {
  Vector out = (z.array() - z.maxCoeff()).exp();
  out /= out.sum();
  return out;
}

void softmax_rows(Matrix& z) {
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    auto row = z.row(r);
    row = (row.array() - row.maxCoeff()).exp();
    row /= row.sum();
  }
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

void require_finite(const Matrix& m, std::string_view what) {
  if (!m.allFinite()) {
    throw NumericalError(std::string(what) + ": non-finite value");
  }
}

LstmCellParams LstmCellParams::zeros(int cells, int input_dim) {
  if (cells < 1 || input_dim < 1) {
    throw DimensionError("LstmCellParams: cells and input_dim must be positive");
  }
  LstmCellParams p;
  p.cells = cells;
  p.input_dim = input_dim;
  p.w_input = Matrix::Zero(4 * cells, input_dim);
  p.w_recurrent = Matrix::Zero(4 * cells, cells);
  p.bias = Vector::Zero(4 * cells);
  return p;
}

LstmCellParams LstmCellParams::uniform(int cells, int input_dim, Rng& rng, double scale,
                                       double forget_bias) {
  LstmCellParams p = zeros(cells, input_dim);
  for (Eigen::Index i = 0; i < p.w_input.size(); ++i) p.w_input.data()[i] = rng.uniform(-scale, scale);
  for (Eigen::Index i = 0; i < p.w_recurrent.size(); ++i) {
    p.w_recurrent.data()[i] = rng.uniform(-scale, scale);
  }
  p.bias_block(Gate::kForget).setConstant(forget_bias);
  return p;
}

std::size_t LstmCellParams::size() const {
  return static_cast<std::size_t>(w_input.size() + w_recurrent.size() + bias.size());
}

void LstmCellParams::check_shapes() const {
  if (w_input.rows() != 4 * cells || w_input.cols() != input_dim ||
      w_recurrent.rows() != 4 * cells || w_recurrent.cols() != cells || bias.size() != 4 * cells) {
    throw DimensionError("LstmCellParams: inconsistent shapes for cells=" + std::to_string(cells) +
                         " input_dim=" + std::to_string(input_dim));
  }
}

void LstmCellParams::set_zero() {
  w_input.setZero();
  w_recurrent.setZero();
  bias.setZero();
}

LstmCellState LstmCellState::zeros(int batch, int cells) {
  return {Matrix::Zero(batch, cells), Matrix::Zero(batch, cells)};
}

LstmCellState lstm_cell_forward(const LstmCellParams& p, const Matrix& x, const LstmCellState& s,
                                LstmTape* tape) {
  const int n = p.cells;
  if (x.cols() != p.input_dim) {
    throw DimensionError("lstm_cell_forward: input " + shape_of(x) + " but input_dim=" +
                         std::to_string(p.input_dim));
  }
  if (s.h.rows() != x.rows() || s.c.rows() != x.rows() || s.h.cols() != n || s.c.cols() != n) {
    throw DimensionError("lstm_cell_forward: state " + shape_of(s.h) + " does not match batch " +
                         std::to_string(x.rows()) + " and cells " + std::to_string(n));
  }

  Matrix gates(x.rows(), 4 * n);
  gates.noalias() = x * p.w_input.transpose();
  gates.noalias() += s.h * p.w_recurrent.transpose();
  gates.rowwise() += p.bias.transpose();

  auto sig = [](auto&& block) { block = (block.array() * 0.5).tanh() * 0.5 + 0.5; };
  sig(gates.middleCols(0, n));
  sig(gates.middleCols(n, n));
  gates.middleCols(2 * n, n) = gates.middleCols(2 * n, n).array().tanh();
  sig(gates.middleCols(3 * n, n));

  LstmCellState out;
  out.c = gates.middleCols(n, n).cwiseProduct(s.c) +
          gates.middleCols(0, n).cwiseProduct(gates.middleCols(2 * n, n));
  Matrix tanh_c = out.c.array().tanh();
  out.h = gates.middleCols(3 * n, n).cwiseProduct(tanh_c);

  if (tape != nullptr) {
    tape->x = x;
    tape->h_prev = s.h;
    tape->c_prev = s.c;
    tape->gates = std::move(gates);
    tape->c = out.c;
    tape->tanh_c = std::move(tanh_c);
  }
  return out;
}

LstmInputGrads lstm_cell_backward(const LstmCellParams& p, const LstmTape& tape, const Matrix& dh,
                                  const Matrix& dc, LstmCellParams& grads) {
  const int n = p.cells;
  const Eigen::Index batch = tape.x.rows();
  if (tape.gates.rows() != batch || tape.gates.cols() != 4 * n || tape.x.cols() != p.input_dim) {
    throw DimensionError("lstm_cell_backward: tape does not match parameters");
  }
  if (dh.rows() != batch || dh.cols() != n || dc.rows() != batch || dc.cols() != n) {
    throw DimensionError("lstm_cell_backward: upstream gradient " + shape_of(dh) +
                         " does not match batch " + std::to_string(batch) + " x " +
                         std::to_string(n));
  }
  if (grads.w_input.rows() != p.w_input.rows() || grads.w_input.cols() != p.w_input.cols() ||
      grads.w_recurrent.rows() != p.w_recurrent.rows() || grads.bias.size() != p.bias.size()) {
    throw DimensionError("lstm_cell_backward: gradient accumulator has wrong shape");
  }

  auto i = tape.gates.middleCols(0, n).array();
  auto f = tape.gates.middleCols(n, n).array();
  auto g = tape.gates.middleCols(2 * n, n).array();
  auto o = tape.gates.middleCols(3 * n, n).array();
  auto tc = tape.tanh_c.array();

  Matrix dcell = dc.array() + dh.array() * o * (1.0 - tc.square());

  // Pre-activation gradients, same layout as the gates.
  Matrix da(batch, 4 * n);
  da.middleCols(0, n) = dcell.array() * g * i * (1.0 - i);
  da.middleCols(n, n) = dcell.array() * tape.c_prev.array() * f * (1.0 - f);
  da.middleCols(2 * n, n) = dcell.array() * i * (1.0 - g.square());
  da.middleCols(3 * n, n) = dh.array() * tc * o * (1.0 - o);

  grads.w_input.noalias() += da.transpose() * tape.x;
  grads.w_recurrent.noalias() += da.transpose() * tape.h_prev;
  grads.bias.noalias() += da.colwise().sum().transpose();

  LstmInputGrads out;
  out.dx.noalias() = da * p.w_input;
  out.dh_prev.noalias() = da * p.w_recurrent;
  out.dc_prev = dcell.array() * f;
  return out;
}

std::vector<double> finite_diff_grad(const ScalarFn& f, std::span<const double> theta, double step) {
  if (!(step > 0.0)) throw ConfigError("finite_diff_grad: step must be positive");
  std::vector<double> point(theta.begin(), theta.end());
  std::vector<double> grad(theta.size());
  for (std::size_t k = 0; k < point.size(); ++k) {
    const double saved = point[k];
    point[k] = saved + step;
    const double up = f(point);
    point[k] = saved - step;
    const double down = f(point);
    point[k] = saved;
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw NumericalError("finite_diff_grad: non-finite evaluation at coordinate " +
                           std::to_string(k));
    }
    grad[k] = (up - down) / (2.0 * step);
  }
  return grad;
}

double relative_error(double a, double b, double floor) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

}  // namespace gkt
