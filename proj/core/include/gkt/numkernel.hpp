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

#ifndef GKT_NUMKERNEL_HPP
#define GKT_NUMKERNEL_HPP

#include <Eigen/Core>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gkt/rng.hpp"

namespace gkt {

// Dense row-major matrix of 64-bit reals. Batched activations use one row
// per stream.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

std::string shape_of(const Matrix& m);

/// Standard matrix product. Throws DimensionError naming both shapes when
/// a.cols() != b.rows().
Matrix matmul(const Matrix& a, const Matrix& b);

/// Max-subtracted softmax; safe for logits of any finite magnitude.
Vector softmax(const Vector& z);

/// In-place row-wise softmax of a batch of logits.
void softmax_rows(Matrix& z);

double sigmoid(double x);

// Throws NumericalError if any entry is NaN or infinite.
void require_finite(const Matrix& m, std::string_view what);

// Gate blocks are stacked in this order along the 4*cells axis.
enum class Gate : int { kInput = 0, kForget = 1, kCandidate = 2, kOutput = 3 };

/// Weights of one LSTM layer without peepholes. The four gates share
/// stacked matrices; use the *_block accessors for per-gate views.
struct LstmCellParams {
  int cells = 0;
  int input_dim = 0;
  Matrix w_input;      // (4*cells) x input_dim
  Matrix w_recurrent;  // (4*cells) x cells
  Vector bias;         // 4*cells

  static LstmCellParams zeros(int cells, int input_dim);

  // Uniform weights in [-scale, scale], zero biases except the forget gate.
  static LstmCellParams uniform(int cells, int input_dim, Rng& rng, double scale = 0.08,
                                double forget_bias = 1.0);

  auto input_block(Gate g) { return w_input.middleRows(static_cast<int>(g) * cells, cells); }
  auto input_block(Gate g) const { return w_input.middleRows(static_cast<int>(g) * cells, cells); }
  auto recurrent_block(Gate g) { return w_recurrent.middleRows(static_cast<int>(g) * cells, cells); }
  auto recurrent_block(Gate g) const {
    return w_recurrent.middleRows(static_cast<int>(g) * cells, cells);
  }
  auto bias_block(Gate g) { return bias.segment(static_cast<int>(g) * cells, cells); }
  auto bias_block(Gate g) const { return bias.segment(static_cast<int>(g) * cells, cells); }

  std::size_t size() const;
  void check_shapes() const;
  void set_zero();
};

/// Recurrent state for a batch of streams (one row per stream).
struct LstmCellState {
  Matrix c;
  Matrix h;

  static LstmCellState zeros(int batch, int cells);
  int batch() const { return static_cast<int>(h.rows()); }
};

/// Values cached by a forward step for the matching backward step.
struct LstmTape {
  Matrix x;
  Matrix h_prev;
  Matrix c_prev;
  Matrix gates;  // activated gates, batch x 4*cells, in Gate order
  Matrix c;
  Matrix tanh_c;
};

/// One LSTM step: i,f,o = sigmoid, candidate = tanh, c' = f*c + i*g,
/// h' = o*tanh(c'). The layer output y is the returned h.
/// `x` is batch x input_dim; the state batch must match.
LstmCellState lstm_cell_forward(const LstmCellParams& p, const Matrix& x, const LstmCellState& s,
                                LstmTape* tape = nullptr);

struct LstmInputGrads {
  Matrix dx;
  Matrix dh_prev;
  Matrix dc_prev;
};

/// Backward through one step. `dh` and `dc` are the loss gradients flowing
/// into the step's outputs h' and c'. Parameter gradients are accumulated
/// into `grads`, which must have the shapes of `p`.
LstmInputGrads lstm_cell_backward(const LstmCellParams& p, const LstmTape& tape, const Matrix& dh,
                                  const Matrix& dc, LstmCellParams& grads);

using ScalarFn = std::function<double(std::span<const double>)>;

/// Central differences (f(t + h e_i) - f(t - h e_i)) / 2h per coordinate.
/// Throws ConfigError for step <= 0 and NumericalError for non-finite f.
std::vector<double> finite_diff_grad(const ScalarFn& f, std::span<const double> theta, double step);

// |a - b| / max(|a|, |b|, floor)
double relative_error(double a, double b, double floor = 1e-8);

}  // namespace gkt

#endif  // GKT_NUMKERNEL_HPP
