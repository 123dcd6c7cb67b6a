#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "rankscope/errors.hpp"
#include "rankscope/linalg.hpp"
#include "rankscope/network.hpp"

namespace rankscope {

inline constexpr std::size_t kRank1MinDepth = 3;

/// A depth-L ReLU network with a width-1 layer that interpolates (X, Y):
/// project onto a random direction u, carry t = u.x - min through 1x1
/// identity layers, then expand into the 1D piecewise-linear interpolant
/// of the outputs sorted by t. Redraws u (up to 32 times) if two
/// projections come within 1e-9 of the projection range.
inline NetworkParams rank1_interpolator(const Matrix& x, const Matrix& y, std::size_t depth, std::uint64_t seed) {
  if (x.cols() != y.cols()) throw ShapeError("X and Y column counts differ");
  if (x.cols() < 2) throw TooFewPoints("rank1_interpolator needs at least two points");
  if (depth < kRank1MinDepth) throw DepthError("rank1_interpolator needs depth >= 3");
  const Index n = x.cols();
  const Index d_in = x.rows();
  const Index d_out = y.rows();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  for (int attempt = 0; attempt < 32; ++attempt) {
    Vector u(d_in);
    for (Index i = 0; i < d_in; ++i) u(i) = normal(rng);
    u.normalize();
    const Vector t = x.transpose() * u;
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::sort(order.begin(), order.end(), [&](Index a, Index b) { return t(a) < t(b); });
    const double lo = t(order.front());
    const double range = t(order.back()) - lo;
    bool collision = !(range > 0.0);
    for (Index i = 1; i < n && !collision; ++i) {
      collision = t(order[static_cast<std::size_t>(i)]) - t(order[static_cast<std::size_t>(i - 1)]) <= 1e-9 * range;
    }
    if (collision) continue;

    // Knots s_i = t_(i) - t_min and slopes of the interpolant between them.
    Vector s(n);
    for (Index i = 0; i < n; ++i) s(i) = t(order[static_cast<std::size_t>(i)]) - lo;
    Matrix slopes(d_out, n - 1);
    for (Index i = 0; i + 1 < n; ++i) {
      slopes.col(i) = (y.col(order[static_cast<std::size_t>(i + 1)]) - y.col(order[static_cast<std::size_t>(i)])) /
                      (s(i + 1) - s(i));
    }

    Tensors net;
    net.weights.push_back(u.transpose());
    net.biases.push_back(Vector::Constant(1, -lo));
    for (std::size_t l = 0; l + kRank1MinDepth < depth; ++l) {
      net.weights.push_back(Matrix::Identity(1, 1));
      net.biases.push_back(Vector::Zero(1));
    }
    net.weights.push_back(Matrix::Ones(n - 1, 1));
    net.biases.push_back(-s.head(n - 1));
    Matrix out(d_out, n - 1);
    out.col(0) = slopes.col(0);
    for (Index i = 1; i + 1 < n; ++i) out.col(i) = slopes.col(i) - slopes.col(i - 1);
    net.weights.push_back(std::move(out));
    net.biases.push_back(y.col(order.front()));
    return NetworkParams(std::move(net), 0.0);
  }
  throw ProjectionError("could not find a projection direction separating all inputs");
}

}  // namespace rankscope
