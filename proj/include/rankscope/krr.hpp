#pragma once

// Kernel ridge regression with a radial kernel, its input Jacobian and the
// probe-based Jacobian rank of the predictor.

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Cholesky>

#include "rankscope/errors.hpp"
#include "rankscope/linalg.hpp"
#include "rankscope/parallel.hpp"

namespace rankscope {

/// k(r) = exp(-r^2 / (2 l^2)); k'(r)/r = -k(r)/l^2 is smooth at r = 0.
struct GaussianKernel {
  double length_scale = 1.0;

  double value(double r) const { return std::exp(-r * r / (2.0 * length_scale * length_scale)); }
  double derivative_over_r(double r) const { return -value(r) / (length_scale * length_scale); }
};

struct KrrModel {
  Matrix train_inputs;  // d_in x N
  Matrix dual_coeffs;   // N x d_out
  GaussianKernel kernel;
  double ridge = 0.0;

  Index input_dim() const { return train_inputs.rows(); }
  Index output_dim() const { return dual_coeffs.cols(); }
};

inline double median_pairwise_distance(const Matrix& x) {
  std::vector<double> d;
  for (Index i = 0; i < x.cols(); ++i)
    for (Index j = i + 1; j < x.cols(); ++j) d.push_back((x.col(i) - x.col(j)).norm());
  if (d.empty()) return 0.0;
  const auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  if (d.size() % 2 == 1) return *mid;
  const double upper = *mid;
  return 0.5 * (upper + *std::max_element(d.begin(), mid));
}

/// Solves (K + lambda I) alpha = Y^T by Cholesky. A length scale <= 0 selects
/// the median pairwise input distance (or 1 for a single point).
inline KrrModel krr_fit(const Matrix& x, const Matrix& y, double lambda, double length_scale = 0.0) {
  require_valid(x, "krr_fit inputs");
  require_valid(y, "krr_fit outputs");
  if (x.cols() != y.cols()) throw ShapeError("X and Y column counts differ");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidConfig("krr ridge must be > 0");
  if (!(length_scale > 0.0)) {
    length_scale = median_pairwise_distance(x);
    if (!(length_scale > 0.0)) length_scale = 1.0;
  }
  KrrModel m{x, Matrix(), GaussianKernel{length_scale}, lambda};
  const Index n = x.cols();
  Matrix k(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = i; j < n; ++j) k(i, j) = k(j, i) = m.kernel.value((x.col(i) - x.col(j)).norm());
  k.diagonal().array() += lambda;
  Eigen::LLT<Matrix> llt(k);
  if (llt.info() != Eigen::Success) throw IllConditioned("kernel system is not positive definite");
  const Matrix rhs = y.transpose();
  m.dual_coeffs = llt.solve(rhs);
  const double residual = (k * m.dual_coeffs - rhs).norm() / std::max(rhs.norm(), 1e-300);
  if (!m.dual_coeffs.allFinite() || residual > 1e-8) {
    throw IllConditioned("kernel solve residual " + std::to_string(residual) + " exceeds 1e-8");
  }
  return m;
}

inline Vector krr_predict(const KrrModel& m, const Vector& x) {
  if (x.size() != m.input_dim()) throw ShapeError("krr_predict: point has wrong dimension");
  Vector kx(m.train_inputs.cols());
  for (Index i = 0; i < kx.size(); ++i) kx(i) = m.kernel.value((x - m.train_inputs.col(i)).norm());
  return m.dual_coeffs.transpose() * kx;
}

inline Matrix krr_predict(const KrrModel& m, const Matrix& x) {
  Matrix out(m.output_dim(), x.cols());
  for (Index j = 0; j < x.cols(); ++j) out.col(j) = krr_predict(m, Vector(x.col(j)));
  return out;
}

/// d f / d x = sum_i alpha_i (k'(r_i)/r_i) (x - x_i)^T, r_i = |x - x_i|.
inline Matrix krr_jacobian(const KrrModel& m, const Vector& x) {
  if (x.size() != m.input_dim()) throw ShapeError("krr_jacobian: point has wrong dimension");
  Matrix j = Matrix::Zero(m.output_dim(), m.input_dim());
  for (Index i = 0; i < m.train_inputs.cols(); ++i) {
    const Vector diff = x - m.train_inputs.col(i);
    const double w = m.kernel.derivative_over_r(diff.norm());
    j.noalias() += (w * m.dual_coeffs.row(i).transpose()) * diff.transpose();
  }
  return j;
}

inline std::size_t krr_rank(const KrrModel& m, const std::vector<Vector>& probes, double rel_tol = 1e-3) {
  if (probes.empty()) throw NoProbes("krr_rank needs at least one probe");
  std::vector<std::size_t> ranks(probes.size());
  parallel_for(probes.size(), [&](std::size_t i) { ranks[i] = numerical_rank(krr_jacobian(m, probes[i]), rel_tol); });
  return *std::max_element(ranks.begin(), ranks.end());
}

}  // namespace rankscope
