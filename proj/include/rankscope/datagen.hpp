#pragma once

// Synthetic datasets with known intrinsic structure, closed-form fixtures,
// the IDX image format, and the dataset CSV exchange format.

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "rankscope/dataset.hpp"
#include "rankscope/errors.hpp"
#include "rankscope/io.hpp"
#include "rankscope/linalg.hpp"
#include "rankscope/network.hpp"

namespace rankscope {

namespace detail {

inline Matrix standard_normal(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  return m;
}

inline double min_pairwise_distance(const Matrix& x) {
  double best = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < x.cols(); ++i)
    for (Index j = i + 1; j < x.cols(); ++j) best = std::min(best, (x.col(i) - x.col(j)).norm());
  return best;
}

inline std::uint64_t reseed(std::uint64_t seed, int attempt) {
  return seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(attempt);
}

inline constexpr int kMaxReseeds = 16;
inline constexpr double kCollisionTol = 1e-9;

}  // namespace detail

/// x = g(z), y = h(z_1..z_k) with z ~ N(0, I_latent); g and h are random
/// shallow ReLU networks.
struct LowRankGenerator {
  NetworkParams g;  // latent -> d_in
  NetworkParams h;  // k -> d_out
  Index latent_dim = 0;
  Index rank = 0;

  /// Outputs as a function of the latent coordinates: z -> h(z_1..z_k).
  Matrix outputs_from_latent(const Matrix& z) const { return evaluate(h, z.topRows(rank)); }
  Matrix inputs_from_latent(const Matrix& z) const { return evaluate(g, z); }

  /// Jacobian of z -> h(z_1..z_k); rank <= k by the chain rule.
  Matrix latent_jacobian(const Vector& z) const {
    Matrix j = Matrix::Zero(h.output_dim(), latent_dim);
    j.leftCols(rank) = jacobian(h, z.head(rank)).jacobian;
    return j;
  }
};

inline LowRankGenerator make_lowrank_generator(Index d_in, Index d_out, Index latent_dim, Index k,
                                               std::uint64_t seed, Index width = 100) {
  if (k < 1 || latent_dim < k || d_in < latent_dim || d_out < 1 || width < 1) {
    throw DimError("need 1 <= k <= latent_dim <= d_in, d_out >= 1 and width >= 1");
  }
  return LowRankGenerator{init_network({latent_dim, width, d_in}, 0.0, seed, 1.0),
                          init_network({k, width, d_out}, 0.0, seed ^ 0xA5A5A5A5A5A5A5A5ULL, 1.0), latent_dim, k};
}

/// Rank-k regression data. Re-seeds (deterministically) when two samples
/// collide in input space, and certifies the chain-rule rank bound at the
/// latent samples before recording meta.true_rank.
inline Dataset synth_lowrank(Index d_in, Index d_out, Index latent_dim, Index k, Index n, std::uint64_t seed,
                             Index width = 100) {
  if (n < 1) throw DimError("need at least one sample");
  for (int attempt = 0; attempt < detail::kMaxReseeds; ++attempt) {
    const std::uint64_t s = detail::reseed(seed, attempt);
    const LowRankGenerator gen = make_lowrank_generator(d_in, d_out, latent_dim, k, s, width);
    std::mt19937_64 rng(s + 1);
    Matrix z = detail::standard_normal(latent_dim, n, rng);
    Matrix x = gen.inputs_from_latent(z);
    if (n > 1 && detail::min_pairwise_distance(x) <= detail::kCollisionTol) continue;
    Dataset d;
    d.X = std::move(x);
    d.Y = gen.outputs_from_latent(z);
    for (Index j = 0; j < std::min<Index>(n, 1000); ++j) {
      if (numerical_rank(gen.latent_jacobian(z.col(j)), 1e-9) > static_cast<std::size_t>(k)) {
        throw DimError("generator violates its rank bound");
      }
    }
    d.latent = std::move(z);
    d.meta.latent_dim = latent_dim;
    d.meta.true_rank = k;
    d.meta.seed = s;
    d.meta.domain_box = bounding_box(d.X);
    d.meta.generator = "lowrank";
    return d;
  }
  throw DimError("could not draw collision-free inputs after re-seeding");
}

struct SShapeOptions {
  double spacing = 0.6;
  /// Jitter standard deviation as a fraction of one curve's extent.
  double jitter = 0.03;
};

/// Point on the inverted S at parameter t in [-1, 1] (before translation).
inline std::array<double, 2> inverted_s(double t) {
  return {0.5 * std::sin(std::numbers::pi * t), t};
}

/// Extent (bounding-box diagonal) of one inverted S.
inline double s_shape_extent() { return std::sqrt(1.0 + 4.0); }

/// n_classes copies of an inverted S translated along x; labels 0..n_classes-1.
inline Dataset s_shape_classes(int n_classes, Index per_class, std::uint64_t seed, const SShapeOptions& opt = {}) {
  if (n_classes < 2) throw DimError("need at least two classes");
  if (per_class < 1) throw DimError("need at least one sample per class");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double sd = opt.jitter * s_shape_extent();
  Dataset d;
  d.X.resize(2, n_classes * per_class);
  d.labels = std::vector<int>();
  Index col = 0;
  for (int c = 0; c < n_classes; ++c) {
    for (Index i = 0; i < per_class; ++i, ++col) {
      const auto p = inverted_s(uni(rng));
      d.X(0, col) = p[0] + opt.spacing * c + sd * normal(rng);
      d.X(1, col) = p[1] + sd * normal(rng);
      d.labels->push_back(c);
    }
  }
  d.meta.seed = seed;
  d.meta.domain_box = bounding_box(d.X);
  d.meta.generator = "sshape";
  return d;
}

/// g : R -> R^2 given by a random ReLU network with random biases, so the
/// curve has kinks inside the bulk of the latent distribution.
struct CurveGenerator {
  NetworkParams g;

  Matrix map(const Matrix& z) const { return evaluate(g, z); }

  /// Dense resampling along an even latent grid on [z_lo, z_hi].
  Matrix dense(Index count, double z_lo = -5.0, double z_hi = 5.0) const {
    Matrix z(1, count);
    for (Index i = 0; i < count; ++i) {
      z(0, i) = count == 1 ? z_lo : z_lo + (z_hi - z_lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    }
    return map(z);
  }

  /// Bounding-box diagonal of the curve over the latent range.
  double extent(double z_lo = -3.0, double z_hi = 3.0) const {
    const Matrix pts = dense(2001, z_lo, z_hi);
    return (pts.rowwise().maxCoeff() - pts.rowwise().minCoeff()).norm();
  }
};

inline CurveGenerator make_curve_generator(std::uint64_t seed, Index width = 16) {
  NetworkParams base = init_network({1, width, 2}, 0.0, seed, 1.0);
  Tensors t = base.tensors();
  std::mt19937_64 rng(seed ^ 0x5DEECE66DULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Index i = 0; i < t.biases[0].size(); ++i) t.biases[0](i) = normal(rng);
  return CurveGenerator{NetworkParams(std::move(t), 0.0)};
}

/// Autoencoder data on a 1-dimensional curve in the plane: X = Y = g(z).
inline Dataset curve1d_in_plane(Index n, std::uint64_t seed, Index width = 16) {
  if (n < 1) throw DimError("need at least one sample");
  for (int attempt = 0; attempt < detail::kMaxReseeds; ++attempt) {
    const std::uint64_t s = detail::reseed(seed, attempt);
    const CurveGenerator gen = make_curve_generator(s, width);
    std::mt19937_64 rng(s + 1);
    Matrix z = detail::standard_normal(1, n, rng);
    Matrix x = gen.map(z);
    if (n > 1 && detail::min_pairwise_distance(x) <= detail::kCollisionTol) continue;
    Dataset d;
    d.X = x;
    d.Y = std::move(x);
    d.latent = std::move(z);
    d.meta.latent_dim = 1;
    d.meta.true_rank = 1;
    d.meta.seed = s;
    d.meta.domain_box = bounding_box(d.X);
    d.meta.generator = "curve1d";
    return d;
  }
  throw DimError("could not draw collision-free curve samples after re-seeding");
}

/// (sign(x0)|x1|, x1) if |x0| >= |x1|, else (x0, sign(x1)|x0|). Continuous,
/// the identity on the cross |x0| = |x1|, with rank-1 Jacobian inside every
/// linear region, yet not factorizable through one dimension. The printed
/// form with the two cases the other way round jumps across the axes.
inline PiecewiseLinearFn xcross_fixture() {
  auto sgn = [](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); };
  PiecewiseLinearFn f;
  f.input_dim = 2;
  f.output_dim = 2;
  f.eval = [sgn](const Vector& x) {
    Vector y(2);
    if (std::fabs(x(0)) >= std::fabs(x(1))) {
      y << sgn(x(0)) * std::fabs(x(1)), x(1);
    } else {
      y << x(0), sgn(x(1)) * std::fabs(x(0));
    }
    return y;
  };
  f.jacobian = [sgn](const Vector& x) {
    Matrix j = Matrix::Zero(2, 2);
    if (std::fabs(x(0)) >= std::fabs(x(1))) {
      j(0, 1) = sgn(x(0)) * sgn(x(1));
      j(1, 1) = 1.0;
    } else {
      j(0, 0) = 1.0;
      j(1, 0) = sgn(x(1)) * sgn(x(0));
    }
    return j;
  };
  return f;
}

// ---------------------------------------------------------------- IDX files

namespace detail {

inline std::uint32_t read_be32(const std::string& bytes, std::size_t offset) {
  if (offset + 4 > bytes.size()) throw FormatError("IDX header truncated");
  std::uint32_t v = 0;
  for (std::size_t i = 0; i < 4; ++i) v = (v << 8) | static_cast<unsigned char>(bytes[offset + i]);
  return v;
}

struct IdxPayload {
  std::vector<std::uint32_t> dims;
  std::size_t offset = 0;
};

inline IdxPayload parse_idx_header(const std::string& bytes, std::uint32_t expected_magic) {
  if (bytes.size() < 4) throw FormatError("IDX file too short for a magic number");
  const std::uint32_t magic = read_be32(bytes, 0);
  if (magic != expected_magic) {
    std::ostringstream msg;
    msg << "bad IDX magic 0x" << std::hex << magic << ", expected 0x" << expected_magic;
    throw FormatError(msg.str());
  }
  IdxPayload p;
  const std::size_t ndims = magic & 0xFFu;
  std::size_t total = 1;
  for (std::size_t i = 0; i < ndims; ++i) {
    p.dims.push_back(read_be32(bytes, 4 + 4 * i));
    total *= p.dims.back();
  }
  p.offset = 4 + 4 * ndims;
  if (bytes.size() < p.offset + total) throw FormatError("IDX payload truncated");
  if (bytes.size() != p.offset + total) throw FormatError("IDX file has trailing bytes");
  return p;
}

}  // namespace detail

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

/// Images as columns of (rows*cols) pixels scaled to [0, 1].
inline Matrix parse_idx_images(const std::string& bytes) {
  const auto p = detail::parse_idx_header(bytes, kIdxImagesMagic);
  const Index count = p.dims[0];
  const Index pixels = static_cast<Index>(p.dims[1]) * static_cast<Index>(p.dims[2]);
  Matrix x(pixels, count);
  std::size_t at = p.offset;
  for (Index j = 0; j < count; ++j)
    for (Index i = 0; i < pixels; ++i) x(i, j) = static_cast<unsigned char>(bytes[at++]) / 255.0;
  return x;
}

inline std::vector<int> parse_idx_labels(const std::string& bytes) {
  const auto p = detail::parse_idx_header(bytes, kIdxLabelsMagic);
  std::vector<int> labels;
  labels.reserve(p.dims[0]);
  for (std::size_t i = 0; i < p.dims[0]; ++i) labels.push_back(static_cast<unsigned char>(bytes[p.offset + i]));
  return labels;
}

/// Loads an IDX image file (and optionally its label file). Without labels
/// the dataset is an autoencoding task (Y = X).
inline Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels = {}) {
  Dataset d;
  d.X = parse_idx_images(io::read_file(images));
  if (!labels.empty()) {
    d.labels = parse_idx_labels(io::read_file(labels));
    if (static_cast<Index>(d.labels->size()) != d.X.cols()) {
      throw FormatError("IDX image count " + std::to_string(d.X.cols()) + " differs from label count " +
                        std::to_string(d.labels->size()));
    }
  } else {
    d.Y = d.X;
  }
  d.meta.generator = "idx";
  return d;
}

// ---------------------------------------------------------------- dataset CSV
//
// Line 1:  #rankscope-dataset v1 d_in=<n> d_out=<n> labeled=<0|1> [latent_dim=..] [true_rank=..] [seed=..] [generator=..]
// Rows:    x_1..x_{d_in}, then y_1..y_{d_out} or a single integer label.

inline std::string dataset_csv(const Dataset& d) {
  d.validate();
  std::ostringstream out;
  out << "#rankscope-dataset v1 d_in=" << d.input_dim() << " d_out=" << (d.labeled() ? 1 : d.output_dim())
      << " labeled=" << (d.labeled() ? 1 : 0);
  if (d.meta.latent_dim) out << " latent_dim=" << *d.meta.latent_dim;
  if (d.meta.true_rank) out << " true_rank=" << *d.meta.true_rank;
  if (d.meta.seed) out << " seed=" << *d.meta.seed;
  if (!d.meta.generator.empty()) out << " generator=" << d.meta.generator;
  out << '\n';
  for (Index j = 0; j < d.size(); ++j) {
    for (Index i = 0; i < d.input_dim(); ++i) out << (i ? "," : "") << io::fmt(d.X(i, j));
    if (d.labeled()) {
      out << ',' << (*d.labels)[static_cast<std::size_t>(j)];
    } else {
      for (Index i = 0; i < d.output_dim(); ++i) out << ',' << io::fmt((*d.Y)(i, j));
    }
    out << '\n';
  }
  return out.str();
}

inline Dataset parse_dataset_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw FormatError("dataset CSV is empty");
  const auto head = io::split_ws(line);
  if (head.size() < 2 || head[0] != "#rankscope-dataset" || head[1] != "v1") {
    throw FormatError("dataset CSV must start with '#rankscope-dataset v1'");
  }
  Index d_in = -1, d_out = -1;
  int labeled = -1;
  Dataset d;
  for (std::size_t i = 2; i < head.size(); ++i) {
    const auto eq = head[i].find('=');
    if (eq == std::string::npos) throw FormatError("bad dataset header field '" + head[i] + "'");
    const std::string key = head[i].substr(0, eq), val = head[i].substr(eq + 1);
    if (key == "d_in") d_in = io::parse_int(val);
    else if (key == "d_out") d_out = io::parse_int(val);
    else if (key == "labeled") labeled = static_cast<int>(io::parse_int(val));
    else if (key == "latent_dim") d.meta.latent_dim = io::parse_int(val);
    else if (key == "true_rank") d.meta.true_rank = io::parse_int(val);
    else if (key == "seed") d.meta.seed = static_cast<std::uint64_t>(io::parse_int(val));
    else if (key == "generator") d.meta.generator = val;
    else throw FormatError("unknown dataset header field '" + key + "'");
  }
  if (d_in < 1 || d_out < 1 || (labeled != 0 && labeled != 1)) {
    throw FormatError("dataset header needs d_in, d_out >= 1 and labeled=0|1");
  }
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  const std::size_t width = static_cast<std::size_t>(d_in + (labeled ? 1 : d_out));
  while (std::getline(in, line)) {
    if (io::trim(line).empty()) continue;
    const auto cells = io::split(io::trim(line), ',');
    if (cells.size() != width) {
      throw FormatError("dataset row has " + std::to_string(cells.size()) + " cells, expected " +
                        std::to_string(width));
    }
    std::vector<double> r;
    for (std::size_t i = 0; i < static_cast<std::size_t>(d_in); ++i) r.push_back(io::parse_double(cells[i]));
    if (labeled) {
      labels.push_back(static_cast<int>(io::parse_int(cells.back(), "label")));
    } else {
      for (std::size_t i = static_cast<std::size_t>(d_in); i < width; ++i) r.push_back(io::parse_double(cells[i]));
    }
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw FormatError("dataset CSV has no rows");
  const Index n = static_cast<Index>(rows.size());
  d.X.resize(d_in, n);
  if (!labeled) d.Y = Matrix(d_out, n);
  for (Index j = 0; j < n; ++j) {
    const auto& r = rows[static_cast<std::size_t>(j)];
    for (Index i = 0; i < d_in; ++i) d.X(i, j) = r[static_cast<std::size_t>(i)];
    if (!labeled)
      for (Index i = 0; i < d_out; ++i) (*d.Y)(i, j) = r[static_cast<std::size_t>(d_in + i)];
  }
  if (labeled) d.labels = std::move(labels);
  d.meta.domain_box = bounding_box(d.X);
  d.validate();
  return d;
}

inline void save_dataset_csv(const Dataset& d, const std::filesystem::path& path) {
  io::write_file_atomic(path, dataset_csv(d));
}

inline Dataset load_dataset_csv(const std::filesystem::path& path) { return parse_dataset_csv(io::read_file(path)); }

}  // namespace rankscope
