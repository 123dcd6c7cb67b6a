#pragma once

// Dense real kernels shared by every analyzer: SVD, Schatten norms,
// numerical rank, and an exactly-rounded accumulator for sums of squares.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "rankscope/errors.hpp"

namespace rankscope {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Singular values of a matrix, sorted nonincreasing.
struct SingularSpectrum {
  std::vector<double> values;
  Index rows = 0;
  Index cols = 0;

  double largest() const { return values.empty() ? 0.0 : values.front(); }
  double at(std::size_t k) const { return k < values.size() ? values[k] : 0.0; }
  /// s_2 / s_1, or 0 for a zero or single-valued spectrum.
  double second_ratio() const {
    if (values.size() < 2 || values.front() <= 0.0) return 0.0;
    return values[1] / values.front();
  }
};

struct SvdResult {
  Matrix u;
  SingularSpectrum s;
  Matrix v;
};

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

inline void require_valid(const Matrix& m, const char* what) {
  if (m.rows() < 1 || m.cols() < 1) {
    throw InvalidMatrix(std::string(what) + ": empty matrix");
  }
  if (!m.allFinite()) {
    throw InvalidMatrix(std::string(what) + ": non-finite entries");
  }
}

/// Thin SVD, m = U diag(S) V^T with U (rows x r), V (cols x r), r = min(rows, cols).
inline SvdResult svd(const Matrix& m) {
  require_valid(m, "svd");
  Eigen::BDCSVD<Matrix> dec(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  SvdResult out;
  out.u = dec.matrixU();
  out.v = dec.matrixV();
  const Vector& sv = dec.singularValues();
  out.s.values.assign(sv.data(), sv.data() + sv.size());
  out.s.rows = m.rows();
  out.s.cols = m.cols();
  return out;
}

/// Singular values only; cheaper than svd() when the factors are not needed.
inline SingularSpectrum singular_values(const Matrix& m) {
  require_valid(m, "singular_values");
  SingularSpectrum s;
  s.rows = m.rows();
  s.cols = m.cols();
  if (m.rows() == 1 || m.cols() == 1) {
    s.values = {m.norm()};
    return s;
  }
  Eigen::BDCSVD<Matrix> dec(m);
  const Vector& sv = dec.singularValues();
  s.values.assign(sv.data(), sv.data() + sv.size());
  return s;
}

/// Sum over k of s_k^p.
inline double schatten_norm(const SingularSpectrum& s, double p) {
  if (!(p > 0.0) || !std::isfinite(p)) throw InvalidExponent("schatten exponent must be > 0");
  double acc = 0.0;
  for (double v : s.values) {
    if (v > 0.0) acc += std::pow(v, p);
  }
  return acc;
}

inline double schatten_norm(const Matrix& m, double p) {
  if (!(p > 0.0) || !std::isfinite(p)) throw InvalidExponent("schatten exponent must be > 0");
  return schatten_norm(singular_values(m), p);
}

/// Number of singular values strictly above rel_tol * s_1. Zero spectrum has rank 0.
inline std::size_t numerical_rank(const SingularSpectrum& s, double rel_tol = 1e-3) {
  const double top = s.largest();
  if (!(top > 0.0)) return 0;
  const double cut = rel_tol * top;
  return static_cast<std::size_t>(
      std::count_if(s.values.begin(), s.values.end(), [cut](double v) { return v > cut; }));
}

inline std::size_t numerical_rank(const Matrix& m, double rel_tol = 1e-3) {
  return numerical_rank(singular_values(m), rel_tol);
}

/// Exactly-rounded floating point summation (Shewchuk's partials, as in
/// Python's math.fsum). The result is the double nearest the exact real sum
/// of everything added, independent of insertion order.
class ExactSum {
 public:
  void add(double x) {
    std::size_t i = 0;
    for (double y : partials_) {
      if (std::fabs(x) < std::fabs(y)) std::swap(x, y);
      const double hi = x + y;
      const double lo = y - (hi - x);
      if (lo != 0.0) partials_[i++] = lo;
      x = hi;
    }
    partials_.resize(i);
    partials_.push_back(x);
  }

  /// Adds x*x exactly: the rounded product plus its fma-recovered error term.
  void add_square(double x) {
    const double p = x * x;
    add(p);
    add(std::fma(x, x, -p));
  }

  void add(const ExactSum& other) {
    for (double p : other.partials_) add(p);
  }

  void subtract(const ExactSum& other) {
    for (double p : other.partials_) add(-p);
  }

  void add_squares(const Matrix& m) {
    for (Index j = 0; j < m.cols(); ++j)
      for (Index i = 0; i < m.rows(); ++i) add_square(m(i, j));
  }

  void add_squares(const Vector& v) {
    for (Index i = 0; i < v.size(); ++i) add_square(v(i));
  }

  double value() const {
    std::size_t n = partials_.size();
    if (n == 0) return 0.0;
    double hi = partials_[--n];
    double lo = 0.0;
    while (n > 0) {
      const double x = hi;
      const double y = partials_[--n];
      hi = x + y;
      const double yr = hi - x;
      lo = y - yr;
      if (lo != 0.0) break;
    }
    // Round-half-even correction when the remaining tail pushes past a tie.
    if (n > 0 && ((lo < 0.0 && partials_[n - 1] < 0.0) || (lo > 0.0 && partials_[n - 1] > 0.0))) {
      const double y = lo * 2.0;
      const double x = hi + y;
      const double yr = x - hi;
      if (y == yr) hi = x;
    }
    return hi;
  }

 private:
  std::vector<double> partials_;
};

/// Square of the Frobenius norm, exactly rounded.
inline double squared_norm(const Matrix& m) {
  ExactSum s;
  s.add_squares(m);
  return s.value();
}

}  // namespace rankscope
