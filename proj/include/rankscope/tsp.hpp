#pragma once

// Shortest open paths through point sets and the depth-dependent norm lower
// bound L * (TSP(Y) / diam(X))^(2/L) for networks interpolating (X, Y).

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "rankscope/errors.hpp"
#include "rankscope/linalg.hpp"

namespace rankscope {

enum class TspMode { Exact, Heuristic, Auto };

inline constexpr Index kTspExactMax = 10;

struct TspPath {
  double length = 0.0;
  std::vector<Index> order;
  TspMode mode = TspMode::Exact;
};

namespace detail {

inline Matrix distance_matrix(const Matrix& pts) {
  const Index n = pts.cols();
  Matrix d(n, n);
  for (Index i = 0; i < n; ++i) {
    d(i, i) = 0.0;
    for (Index j = i + 1; j < n; ++j) d(i, j) = d(j, i) = (pts.col(i) - pts.col(j)).norm();
  }
  return d;
}

inline double path_length(const Matrix& d, const std::vector<Index>& order) {
  double len = 0.0;
  for (std::size_t i = 1; i < order.size(); ++i) len += d(order[i - 1], order[i]);
  return len;
}

inline TspPath exact_path(const Matrix& d) {
  const Index n = d.rows();
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  TspPath best{std::numeric_limits<double>::infinity(), perm, TspMode::Exact};
  do {
    if (perm.front() > perm.back()) continue;  // each path and its reverse once
    const double len = path_length(d, perm);
    if (len < best.length) {
      best.length = len;
      best.order = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

inline std::vector<Index> nearest_neighbour(const Matrix& d, Index start) {
  const Index n = d.rows();
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  std::vector<Index> order{start};
  used[static_cast<std::size_t>(start)] = true;
  for (Index step = 1; step < n; ++step) {
    const Index cur = order.back();
    Index next = -1;
    for (Index j = 0; j < n; ++j) {
      if (!used[static_cast<std::size_t>(j)] && (next < 0 || d(cur, j) < d(cur, next))) next = j;
    }
    used[static_cast<std::size_t>(next)] = true;
    order.push_back(next);
  }
  return order;
}

/// 2-opt for open paths: reversing order[i..j] swaps the edges entering and
/// leaving the segment; a missing edge (segment touching an end) costs 0.
inline void two_opt(const Matrix& d, std::vector<Index>& order) {
  const std::size_t n = order.size();
  auto edge = [&](std::size_t a, std::size_t b) { return d(order[a], order[b]); };
  bool improved = true;
  while (improved) {
    improved = false;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (i == 0 && j == n - 1) continue;
        double before = 0.0, after = 0.0;
        if (i > 0) {
          before += edge(i - 1, i);
          after += edge(i - 1, j);
        }
        if (j + 1 < n) {
          before += edge(j, j + 1);
          after += edge(i, j + 1);
        }
        if (after < before - 1e-12) {
          std::reverse(order.begin() + static_cast<std::ptrdiff_t>(i), order.begin() + static_cast<std::ptrdiff_t>(j) + 1);
          improved = true;
        }
      }
    }
  }
}

inline TspPath heuristic_path(const Matrix& d) {
  const Index n = d.rows();
  const Index starts = std::min<Index>(n, 10);
  TspPath best{std::numeric_limits<double>::infinity(), {}, TspMode::Heuristic};
  for (Index s = 0; s < starts; ++s) {
    auto order = nearest_neighbour(d, s * n / starts);
    two_opt(d, order);
    const double len = path_length(d, order);
    if (len < best.length) {
      best.length = len;
      best.order = std::move(order);
    }
  }
  return best;
}

}  // namespace detail

/// Shortest open path through the columns of `points`. Exact mode enumerates
/// permutations (N <= 10); heuristic mode runs nearest-neighbour + 2-opt from
/// up to 10 starts. Auto picks exact when N <= 10.
inline TspPath tsp_path(const Matrix& points, TspMode mode = TspMode::Auto) {
  const Index n = points.cols();
  if (n < 2) throw TooFewPoints("tsp_path needs at least two points");
  if (mode == TspMode::Auto) mode = n <= kTspExactMax ? TspMode::Exact : TspMode::Heuristic;
  if (mode == TspMode::Exact && n > kTspExactMax) {
    throw DimError("exact tsp_path is limited to " + std::to_string(kTspExactMax) + " points");
  }
  const Matrix d = detail::distance_matrix(points);
  return mode == TspMode::Exact ? detail::exact_path(d) : detail::heuristic_path(d);
}

inline double diameter(const Matrix& points) {
  double best = 0.0;
  for (Index i = 0; i < points.cols(); ++i)
    for (Index j = i + 1; j < points.cols(); ++j) best = std::max(best, (points.col(i) - points.col(j)).norm());
  return best;
}

struct TspBound {
  double tsp_length = 0.0;
  double diameter = 0.0;
  std::size_t depth = 0;
  double norm_lower_bound = 0.0;
  TspMode mode = TspMode::Exact;
};

inline const char* to_string(TspMode m) {
  switch (m) {
    case TspMode::Exact: return "exact";
    case TspMode::Heuristic: return "heuristic";
    case TspMode::Auto: return "auto";
  }
  return "?";
}

/// ||W||^2 >= L (TSP(Y) / diam(X))^(2/L) for any depth-L network with f(X) = Y.
/// A heuristic path over-estimates TSP, so the heuristic bound is not
/// rigorous; exact mode is.
inline TspBound tsp_lower_bound(const Matrix& x, const Matrix& y, std::size_t depth, TspMode mode = TspMode::Auto) {
  if (x.cols() != y.cols()) throw ShapeError("X and Y column counts differ");
  if (depth < 1) throw DepthError("depth must be >= 1");
  TspBound b;
  b.depth = depth;
  b.diameter = diameter(x);
  if (!(b.diameter > 0.0)) throw DegenerateInputs("input diameter is zero");
  const TspPath path = tsp_path(y, mode);
  b.tsp_length = path.length;
  b.mode = path.mode;
  const double l = static_cast<double>(depth);
  b.norm_lower_bound = l * std::pow(b.tsp_length / b.diameter, 2.0 / l);
  return b;
}

}  // namespace rankscope
