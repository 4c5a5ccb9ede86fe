#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "autossl/error.hpp"

namespace autossl {

using Index = Eigen::Index;
using DenseMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using CsrMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, std::int64_t>;

inline bool all_finite(const DenseMatrix& m) { return m.allFinite(); }

inline std::string shape_string(Index rows, Index cols) {
  return std::to_string(rows) + "x" + std::to_string(cols);
}

inline void require_same_shape(const DenseMatrix& a, const DenseMatrix& b, std::string_view what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(what) + ": shape " + shape_string(a.rows(), a.cols()) +
                         " does not match " + shape_string(b.rows(), b.cols()));
  }
}

// Sparse-dense product sparse * dense.
inline DenseMatrix spmm(const CsrMatrix& sparse, const DenseMatrix& dense) {
  if (sparse.cols() != dense.rows()) {
    throw DimensionError("spmm: inner dimensions differ (" + shape_string(sparse.rows(), sparse.cols()) +
                         " * " + shape_string(dense.rows(), dense.cols()) + ")");
  }
  DenseMatrix out = DenseMatrix::Zero(sparse.rows(), dense.cols());
  for (Index r = 0; r < sparse.outerSize(); ++r) {
    for (CsrMatrix::InnerIterator it(sparse, r); it; ++it) {
      out.row(r).noalias() += it.value() * dense.row(it.col());
    }
  }
  return out;
}

// Bias-corrected Adam. Moments are sized lazily on the first step.
struct AdamState {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon_hat = 1e-8;
  std::int64_t step_count = 0;
  DenseMatrix first_moment;
  DenseMatrix second_moment;

  AdamState() = default;
  explicit AdamState(double lr) : learning_rate(lr) {}
};

inline void adam_step(DenseMatrix& params, const DenseMatrix& grads, AdamState& state,
                      std::string_view block = "parameters") {
  require_same_shape(params, grads, std::string("adam_step(") + std::string(block) + ")");
  if (!grads.allFinite()) {
    throw NumericError("adam_step: non-finite gradient in block '" + std::string(block) + "'");
  }
  if (state.step_count == 0 || state.first_moment.rows() != params.rows() ||
      state.first_moment.cols() != params.cols()) {
    state.first_moment = DenseMatrix::Zero(params.rows(), params.cols());
    state.second_moment = DenseMatrix::Zero(params.rows(), params.cols());
  }
  ++state.step_count;
  state.first_moment = state.beta1 * state.first_moment + (1.0 - state.beta1) * grads;
  state.second_moment = state.beta2 * state.second_moment + (1.0 - state.beta2) * grads.cwiseAbs2();
  const double t = static_cast<double>(state.step_count);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  // With beta = 0 the correction factors are exactly 1.
  for (Index i = 0; i < params.size(); ++i) {
    const double m_hat = state.first_moment.data()[i] / c1;
    const double v_hat = state.second_moment.data()[i] / c2;
    params.data()[i] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon_hat);
  }
}

inline void adam_step(Vector& params, const Vector& grads, AdamState& state,
                      std::string_view block = "parameters") {
  DenseMatrix p = params.transpose();
  DenseMatrix g = grads.transpose();
  adam_step(p, g, state, block);
  params = p.transpose();
}

// Central-difference gradient check.
//
// Returns max_i |analytic_i - numeric_i| / max(|numeric_i|, 1e-8). The loss is
// evaluated twice at the base point first; a mismatch means the loss is not
// deterministic and the comparison would be meaningless.
inline double finite_diff_check(const std::function<double(const DenseMatrix&)>& loss_fn,
                                const DenseMatrix& params, const DenseMatrix& analytic_grad,
                                double delta) {
  require_same_shape(params, analytic_grad, "finite_diff_check");
  if (!(delta > 0.0)) throw ConfigError("finite_diff_check: delta must be positive");
  const double base_a = loss_fn(params);
  const double base_b = loss_fn(params);
  if (base_a != base_b && !(std::isnan(base_a) && std::isnan(base_b))) {
    throw OracleError("finite_diff_check: loss function is not deterministic");
  }
  DenseMatrix probe = params;
  double worst = 0.0;
  for (Index i = 0; i < params.size(); ++i) {
    const double orig = probe.data()[i];
    probe.data()[i] = orig + delta;
    const double up = loss_fn(probe);
    probe.data()[i] = orig - delta;
    const double down = loss_fn(probe);
    probe.data()[i] = orig;
    const double numeric = (up - down) / (2.0 * delta);
    const double err = std::abs(analytic_grad.data()[i] - numeric) / std::max(std::abs(numeric), 1e-8);
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace autossl
