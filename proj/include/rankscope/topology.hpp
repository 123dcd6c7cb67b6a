#pragma once

// Geometry of learned functions in the plane: tripoints of a classifier's
// decision regions and the denoising ratio of an autoencoder.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include "rankscope/errors.hpp"
#include "rankscope/linalg.hpp"
#include "rankscope/network.hpp"
#include "rankscope/parallel.hpp"

namespace rankscope {

struct Grid2D {
  double x_lo = 0.0, x_hi = 1.0, y_lo = 0.0, y_hi = 1.0;
  Index nx = 100, ny = 100;

  double dx() const { return (x_hi - x_lo) / static_cast<double>(nx); }
  double dy() const { return (y_hi - y_lo) / static_cast<double>(ny); }
  double spacing() const { return std::max(dx(), dy()); }
  Vector center(Index i, Index j) const {
    Vector c(2);
    c << x_lo + (static_cast<double>(i) + 0.5) * dx(), y_lo + (static_cast<double>(j) + 0.5) * dy();
    return c;
  }
};

inline std::vector<int> class_map(const PiecewiseLinearFn& classifier, const Grid2D& grid) {
  if (classifier.input_dim != 2) throw DimError("tripoints need a 2D input domain");
  if (grid.nx < 1 || grid.ny < 1 || !(grid.x_hi > grid.x_lo) || !(grid.y_hi > grid.y_lo)) {
    throw InvalidConfig("grid must have positive extent and resolution");
  }
  std::vector<int> cls(static_cast<std::size_t>(grid.nx * grid.ny));
  parallel_for(cls.size(), [&](std::size_t c) {
    const Index i = static_cast<Index>(c) % grid.nx, j = static_cast<Index>(c) / grid.nx;
    Index best;
    classifier.eval(grid.center(i, j)).maxCoeff(&best);
    cls[c] = static_cast<int>(best);
  });
  return cls;
}

/// Centers of grid cells whose closed radius-neighbourhood (over cell
/// centers) holds at least three distinct predicted classes. radius <= 0
/// selects 1.5 x grid spacing.
inline std::vector<Vector> tripoints(const PiecewiseLinearFn& classifier, const Grid2D& grid, double radius = 0.0) {
  if (!(radius > 0.0)) radius = 1.5 * grid.spacing();
  const std::vector<int> cls = class_map(classifier, grid);
  const Index ri = static_cast<Index>(std::floor(radius / grid.dx())), rj = static_cast<Index>(std::floor(radius / grid.dy()));
  std::vector<Vector> out;
  for (Index j = 0; j < grid.ny; ++j) {
    for (Index i = 0; i < grid.nx; ++i) {
      std::set<int> seen;
      for (Index b = std::max<Index>(0, j - rj); b <= std::min(grid.ny - 1, j + rj) && seen.size() < 3; ++b) {
        for (Index a = std::max<Index>(0, i - ri); a <= std::min(grid.nx - 1, i + ri); ++a) {
          const double ddx = static_cast<double>(a - i) * grid.dx(), ddy = static_cast<double>(b - j) * grid.dy();
          if (ddx * ddx + ddy * ddy <= radius * radius * (1.0 + 1e-12)) seen.insert(cls[static_cast<std::size_t>(b * grid.nx + a)]);
        }
      }
      if (seen.size() >= 3) out.push_back(grid.center(i, j));
    }
  }
  return out;
}

/// Connected components of points under the "within link distance" relation.
inline std::size_t count_clusters(const std::vector<Vector>& pts, double link) {
  std::vector<std::size_t> parent(pts.size());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  std::function<std::size_t(std::size_t)> root = [&](std::size_t i) {
    return parent[i] == i ? i : parent[i] = root(parent[i]);
  };
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      if ((pts[i] - pts[j]).norm() <= link * (1.0 + 1e-12)) parent[root(i)] = root(j);
  std::size_t n = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) n += root(i) == i;
  return n;
}

/// Samples on-manifold points; `dense` is a fine resampling of the whole
/// manifold used for nearest-neighbour distances.
struct ManifoldSampler {
  std::function<Matrix(Index count, std::mt19937_64& rng)> sample;
  Matrix dense;
};

inline double distance_to_set(const Vector& x, const Matrix& dense) {
  return std::sqrt((dense.colwise() - x).colwise().squaredNorm().minCoeff());
}

/// Mean over trials of dist(f(x + noise), M) / dist(x + noise, M), with
/// isotropic Gaussian noise of per-coordinate standard deviation noise_scale.
inline double denoising_score(const PiecewiseLinearFn& f, const ManifoldSampler& sampler, double noise_scale,
                              std::size_t n_trials, std::uint64_t seed) {
  if (n_trials == 0) throw InvalidConfig("denoising needs at least one trial");
  std::mt19937_64 rng(seed);
  const Matrix clean = sampler.sample(static_cast<Index>(n_trials), rng);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix noisy = clean;
  for (Index j = 0; j < noisy.cols(); ++j)
    for (Index i = 0; i < noisy.rows(); ++i) noisy(i, j) += noise_scale * normal(rng);
  std::vector<double> ratios(n_trials, -1.0);
  parallel_for(n_trials, [&](std::size_t t) {
    const Vector xn = noisy.col(static_cast<Index>(t));
    const double before = distance_to_set(xn, sampler.dense);
    if (before > 0.0) ratios[t] = distance_to_set(f.eval(xn), sampler.dense) / before;
  });
  double sum = 0.0;
  std::size_t used = 0;
  for (double r : ratios) {
    if (r >= 0.0) {
      sum += r;
      ++used;
    }
  }
  if (used == 0) throw DegenerateBatch("every noisy sample landed on the manifold");
  return sum / static_cast<double>(used);
}

inline double denoising_score(const NetworkParams& p, const ManifoldSampler& sampler, double noise_scale,
                              std::size_t n_trials, std::uint64_t seed) {
  return denoising_score(as_function(p), sampler, noise_scale, n_trials, seed);
}

}  // namespace rankscope
