#pragma once

// Fully-connected networks with the homogeneous nonlinearity
//   sigma_a(z) = z for z >= 0, a*z otherwise,  a in (-1, 1),
// applied on every hidden layer; the output layer is affine. Layers are
// stored 0-based in code: weight(l) is W_{l+1} in the usual 1-based numbering.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "rankscope/errors.hpp"
#include "rankscope/linalg.hpp"

namespace rankscope {

inline double sigma(double z, double a) { return z >= 0.0 ? z : a * z; }
/// Derivative of sigma_a with the convention sigma_a'(0) = 1.
inline double sigma_slope(double z, double a) { return z >= 0.0 ? 1.0 : a; }

inline Matrix apply_sigma(const Matrix& z, double a) {
  return (z.array() >= 0.0).select(z, a * z);
}

/// Per-layer weights and biases. Doubles as the gradient and optimizer-state
/// container because it mirrors the parameter layout exactly.
struct Tensors {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;

  std::size_t depth() const { return weights.size(); }

  Tensors zeros_like() const {
    Tensors t;
    t.weights.reserve(weights.size());
    t.biases.reserve(biases.size());
    for (const auto& w : weights) t.weights.push_back(Matrix::Zero(w.rows(), w.cols()));
    for (const auto& b : biases) t.biases.push_back(Vector::Zero(b.size()));
    return t;
  }

  bool all_finite() const {
    for (const auto& w : weights)
      if (!w.allFinite()) return false;
    for (const auto& b : biases)
      if (!b.allFinite()) return false;
    return true;
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& w : weights) n += static_cast<std::size_t>(w.size());
    for (const auto& b : biases) n += static_cast<std::size_t>(b.size());
    return n;
  }
};

inline void accumulate_squares(ExactSum& acc, const Tensors& t) {
  for (std::size_t l = 0; l < t.depth(); ++l) {
    acc.add_squares(t.weights[l]);
    acc.add_squares(t.biases[l]);
  }
}

/// Axis-aligned box; used to bound the range of a sub-network on its domain.
struct DomainBox {
  Vector lo;
  Vector hi;

  Index dim() const { return lo.size(); }
  bool contains(const Vector& x) const {
    return x.size() == lo.size() && (x.array() >= lo.array()).all() && (x.array() <= hi.array()).all();
  }
};

class NetworkParams {
 public:
  NetworkParams(Tensors tensors, double leaky_slope) : t_(std::move(tensors)), a_(leaky_slope) { validate(); }

  std::size_t depth() const { return t_.depth(); }
  double leaky_slope() const { return a_; }
  const Tensors& tensors() const { return t_; }
  const Matrix& weight(std::size_t l) const { return t_.weights.at(l); }
  const Vector& bias(std::size_t l) const { return t_.biases.at(l); }
  Index input_dim() const { return t_.weights.front().cols(); }
  Index output_dim() const { return t_.weights.back().rows(); }

  /// n_0, n_1, ..., n_L.
  std::vector<Index> widths() const {
    std::vector<Index> n{input_dim()};
    for (const auto& w : t_.weights) n.push_back(w.rows());
    return n;
  }

 private:
  void validate() const {
    if (t_.weights.empty()) throw InvalidArchitecture("network needs at least one layer");
    if (t_.weights.size() != t_.biases.size()) throw InvalidArchitecture("weights/biases count mismatch");
    if (!(a_ > -1.0 && a_ < 1.0)) throw InvalidArchitecture("leaky slope must lie in (-1, 1)");
    for (std::size_t l = 0; l < t_.weights.size(); ++l) {
      const auto& w = t_.weights[l];
      if (w.rows() < 1 || w.cols() < 1) throw InvalidArchitecture("empty weight matrix");
      if (t_.biases[l].size() != w.rows()) throw InvalidArchitecture("bias length does not match layer width");
      if (l > 0 && w.cols() != t_.weights[l - 1].rows()) {
        throw InvalidArchitecture("weight shapes are not chained at layer " + std::to_string(l + 1));
      }
    }
    if (!t_.all_finite()) throw InvalidArchitecture("non-finite parameters");
  }

  Tensors t_;
  double a_;
};

/// Gaussian init with std scale/sqrt(n_{l-1}) and zero biases; deterministic per seed.
inline NetworkParams init_network(const std::vector<Index>& widths, double leaky_slope, std::uint64_t seed,
                                  double scale = 1.0) {
  if (widths.size() < 2) throw InvalidArchitecture("widths must list at least input and output");
  for (Index n : widths)
    if (n < 1) throw InvalidArchitecture("all widths must be >= 1");
  if (!(leaky_slope > -1.0 && leaky_slope < 1.0)) throw InvalidArchitecture("leaky slope must lie in (-1, 1)");
  if (!(scale >= 0.0) || !std::isfinite(scale)) throw InvalidArchitecture("init scale must be finite and >= 0");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Tensors t;
  for (std::size_t l = 1; l < widths.size(); ++l) {
    const double sd = scale / std::sqrt(static_cast<double>(widths[l - 1]));
    Matrix w(widths[l], widths[l - 1]);
    for (Index i = 0; i < w.rows(); ++i)
      for (Index j = 0; j < w.cols(); ++j) w(i, j) = sd * normal(rng);
    t.weights.push_back(std::move(w));
    t.biases.push_back(Vector::Zero(widths[l]));
  }
  return NetworkParams(std::move(t), leaky_slope);
}

/// Per-layer values for a batch (columns are samples).
struct ActivationTrace {
  std::vector<Matrix> preactivations;  // Z~_1 .. Z~_L
  std::vector<Matrix> activations;     // Z_0 .. Z_{L-1}
  Index batch = 0;
};

struct ForwardResult {
  Matrix output;
  ActivationTrace trace;
};

namespace detail {

inline void check_input(const Tensors& t, const Matrix& x) {
  if (x.rows() != t.weights.front().cols()) {
    throw ShapeError("input has " + std::to_string(x.rows()) + " rows, network expects " +
                     std::to_string(t.weights.front().cols()));
  }
  if (x.cols() < 1) throw ShapeError("empty batch");
}

inline void forward_trace(const Tensors& t, double a, const Matrix& x, ActivationTrace& trace) {
  check_input(t, x);
  const std::size_t depth = t.depth();
  trace.batch = x.cols();
  trace.activations.resize(depth);
  trace.preactivations.resize(depth);
  trace.activations[0] = x;
  for (std::size_t l = 0; l < depth; ++l) {
    trace.preactivations[l].noalias() = t.weights[l] * trace.activations[l];
    trace.preactivations[l].colwise() += t.biases[l];
    if (l + 1 < depth) trace.activations[l + 1] = apply_sigma(trace.preactivations[l], a);
  }
}

inline Matrix evaluate(const Tensors& t, double a, const Matrix& x) {
  check_input(t, x);
  Matrix z = x;
  for (std::size_t l = 0; l < t.depth(); ++l) {
    Matrix zt = t.weights[l] * z;
    zt.colwise() += t.biases[l];
    z = (l + 1 < t.depth()) ? apply_sigma(zt, a) : std::move(zt);
  }
  return z;
}

}  // namespace detail

inline ForwardResult forward(const NetworkParams& p, const Matrix& x) {
  ForwardResult r;
  detail::forward_trace(p.tensors(), p.leaky_slope(), x, r.trace);
  r.output = r.trace.preactivations.back();
  return r;
}

/// Output only; skips storing the trace.
inline Matrix evaluate(const NetworkParams& p, const Matrix& x) {
  return detail::evaluate(p.tensors(), p.leaky_slope(), x);
}

inline Vector evaluate_point(const NetworkParams& p, const Vector& x) {
  Matrix col = x;
  return detail::evaluate(p.tensors(), p.leaky_slope(), col).col(0);
}

struct JacobianResult {
  Matrix jacobian;
  /// True when some hidden pre-activation lies within the boundary margin
  /// (1e-6 x that layer's pre-activation RMS) of a kink.
  bool near_boundary = false;
  /// min over hidden units of |z~| / RMS(layer); +inf for depth-1 networks.
  double min_margin_ratio = std::numeric_limits<double>::infinity();
};

inline constexpr double kBoundaryMargin = 1e-6;

/// Exact chain-rule Jacobian W_L D_{L-1} W_{L-1} ... D_1 W_1 at x.
inline JacobianResult jacobian(const NetworkParams& p, const Vector& x) {
  const auto& t = p.tensors();
  const double a = p.leaky_slope();
  if (x.size() != p.input_dim()) throw ShapeError("jacobian: point has wrong dimension");
  JacobianResult r;
  Vector z = x;
  Matrix j = Matrix::Identity(x.size(), x.size());
  for (std::size_t l = 0; l < t.depth(); ++l) {
    Vector zt = t.weights[l] * z + t.biases[l];
    j = t.weights[l] * j;
    if (l + 1 == t.depth()) break;
    const double rms = std::sqrt(zt.squaredNorm() / static_cast<double>(zt.size()));
    for (Index i = 0; i < zt.size(); ++i) {
      const double ratio = rms > 0.0 ? std::fabs(zt(i)) / rms : 0.0;
      r.min_margin_ratio = std::min(r.min_margin_ratio, ratio);
      if (ratio < kBoundaryMargin) r.near_boundary = true;
      const double d = sigma_slope(zt(i), a);
      if (d != 1.0) j.row(i) *= d;
      zt(i) = sigma(zt(i), a);
    }
    z = std::move(zt);
  }
  r.jacobian = std::move(j);
  return r;
}

/// Sign pattern (z~ >= 0) of every hidden unit at x, concatenated layer by layer.
inline std::vector<bool> activation_pattern(const NetworkParams& p, const Vector& x) {
  const auto& t = p.tensors();
  std::vector<bool> pattern;
  Vector z = x;
  for (std::size_t l = 0; l + 1 < t.depth(); ++l) {
    Vector zt = t.weights[l] * z + t.biases[l];
    for (Index i = 0; i < zt.size(); ++i) {
      pattern.push_back(zt(i) >= 0.0);
      zt(i) = sigma(zt(i), p.leaky_slope());
    }
    z = std::move(zt);
  }
  return pattern;
}

/// ||W||^2 = sum_l ||W_l||_F^2 + ||b_l||^2, exactly rounded.
inline double param_norm(const NetworkParams& p) {
  ExactSum s;
  accumulate_squares(s, p.tensors());
  return s.value();
}

inline double param_norm(const Tensors& t) {
  ExactSum s;
  accumulate_squares(s, t);
  return s.value();
}

/// A function with a Jacobian oracle. Networks and closed-form fixtures both
/// provide this interface to the rank analyzers.
struct PiecewiseLinearFn {
  Index input_dim = 0;
  Index output_dim = 0;
  std::function<Vector(const Vector&)> eval;
  std::function<Matrix(const Vector&)> jacobian;
};

inline PiecewiseLinearFn as_function(const NetworkParams& p) {
  auto shared = std::make_shared<const NetworkParams>(p);
  PiecewiseLinearFn f;
  f.input_dim = p.input_dim();
  f.output_dim = p.output_dim();
  f.eval = [shared](const Vector& x) { return evaluate_point(*shared, x); };
  f.jacobian = [shared](const Vector& x) { return jacobian(*shared, x).jacobian; };
  return f;
}

/// Rewrites a ReLU network for the leaky nonlinearity sigma_a by doubling
/// every hidden neuron, using max{0,z} = (sigma_a(z) + a sigma_a(-z)) / (1 - a^2).
inline NetworkParams convert_relu_to_leaky(const NetworkParams& p, double target_a) {
  if (p.leaky_slope() != 0.0) throw NotReLU("convert_relu_to_leaky expects a ReLU network (a = 0)");
  if (!(target_a > -1.0 && target_a < 1.0)) throw InvalidArchitecture("target slope must lie in (-1, 1)");
  const auto& t = p.tensors();
  const std::size_t depth = t.depth();
  const double inv = 1.0 / (1.0 - target_a * target_a);
  Tensors out;
  // relu(previous layer) = readout * (doubled activations of the previous layer)
  for (std::size_t l = 0; l < depth; ++l) {
    Matrix w = t.weights[l];
    if (l > 0) {
      const Index n = w.cols();
      Matrix readout(w.rows(), 2 * n);
      readout.leftCols(n) = w * inv;
      readout.rightCols(n) = w * (target_a * inv);
      w = std::move(readout);
    }
    if (l + 1 < depth) {
      Matrix doubled(2 * w.rows(), w.cols());
      doubled.topRows(w.rows()) = w;
      doubled.bottomRows(w.rows()) = -w;
      Vector b(2 * t.biases[l].size());
      b << t.biases[l], -t.biases[l];
      out.weights.push_back(std::move(doubled));
      out.biases.push_back(std::move(b));
    } else {
      out.weights.push_back(std::move(w));
      out.biases.push_back(t.biases[l]);
    }
  }
  return NetworkParams(std::move(out), target_a);
}

/// Norm accounting of a serial composition h o g with identity middle layers.
struct SerialLedger {
  double g_norm = 0.0;
  double identity_cost = 0.0;  // k * (total_L - L_g - L_h)
  double h_norm = 0.0;
  double shift_cost = 0.0;     // change of bias norms caused by the quadrant shift
  double total = 0.0;          // exactly rounded sum of the four parts above
  Index bottleneck_width = 0;
  std::size_t identity_layers = 0;
};

struct SerialComposition {
  NetworkParams network;
  SerialLedger ledger;
};

/// Depth-total_L network computing h(g(x)) on the domain where g's outputs lie
/// in `g_range`. g's output is shifted into the nonnegative quadrant so the
/// k x k identity layers pass it through sigma_a unchanged; h's first bias
/// undoes the shift.
inline SerialComposition compose_serial(const NetworkParams& g, const NetworkParams& h, std::size_t total_depth,
                                        const DomainBox& g_range) {
  const Index k = g.output_dim();
  if (h.input_dim() != k) {
    throw CompositionError("g outputs " + std::to_string(k) + " values but h expects " +
                           std::to_string(h.input_dim()));
  }
  if (g.leaky_slope() != h.leaky_slope()) throw CompositionError("g and h use different nonlinearities");
  if (g_range.lo.size() != k || g_range.hi.size() != k) throw CompositionError("domain box dimension must equal k");
  if ((g_range.lo.array() > g_range.hi.array()).any() || !g_range.lo.allFinite() || !g_range.hi.allFinite()) {
    throw CompositionError("domain box must satisfy lo <= hi with finite bounds");
  }
  if (total_depth < g.depth() + h.depth()) {
    throw DepthError("total depth " + std::to_string(total_depth) + " < depth(g) + depth(h) = " +
                     std::to_string(g.depth() + h.depth()));
  }

  const Vector shift = (-g_range.lo.array()).max(0.0).matrix();
  const auto& tg = g.tensors();
  const auto& th = h.tensors();
  const std::size_t middle = total_depth - g.depth() - h.depth();

  Tensors out = tg;
  out.biases.back() += shift;
  for (std::size_t i = 0; i < middle; ++i) {
    out.weights.push_back(Matrix::Identity(k, k));
    out.biases.push_back(Vector::Zero(k));
  }
  const std::size_t h_first = out.weights.size();
  for (std::size_t l = 0; l < th.depth(); ++l) {
    out.weights.push_back(th.weights[l]);
    out.biases.push_back(th.biases[l]);
  }
  out.biases[h_first] -= th.weights[0] * shift;

  ExactSum g_sum, h_sum, shift_sum;
  accumulate_squares(g_sum, tg);
  accumulate_squares(h_sum, th);
  ExactSum before;
  before.add_squares(tg.biases.back());
  before.add_squares(th.biases.front());
  shift_sum.add_squares(out.biases[g.depth() - 1]);
  shift_sum.add_squares(out.biases[h_first]);
  shift_sum.subtract(before);

  SerialLedger ledger;
  ledger.bottleneck_width = k;
  ledger.identity_layers = middle;
  ledger.g_norm = g_sum.value();
  ledger.h_norm = h_sum.value();
  ledger.identity_cost = static_cast<double>(k) * static_cast<double>(middle);
  ledger.shift_cost = shift_sum.value();
  ExactSum total;
  total.add(g_sum);
  total.add(ledger.identity_cost);
  total.add(h_sum);
  total.add(shift_sum);
  ledger.total = total.value();

  return SerialComposition{NetworkParams(std::move(out), g.leaky_slope()), ledger};
}

struct ParallelComposition {
  NetworkParams network;
  double f_norm = 0.0;
  double g_norm = 0.0;
  /// ||b_f + b_g||^2 - ||b_f||^2 - ||b_g||^2 for the merged output bias; zero
  /// when either output bias vanishes.
  double output_bias_cost = 0.0;
  double total = 0.0;
};

/// Network computing f + g: stacked first layer, block-diagonal middle layers,
/// concatenated last layer.
inline ParallelComposition compose_parallel(const NetworkParams& f, const NetworkParams& g) {
  if (f.depth() != g.depth()) throw CompositionError("parallel composition needs equal depths");
  if (f.depth() < 2) throw CompositionError("parallel composition needs depth >= 2");
  if (f.input_dim() != g.input_dim() || f.output_dim() != g.output_dim()) {
    throw CompositionError("parallel composition needs equal input and output widths");
  }
  if (f.leaky_slope() != g.leaky_slope()) throw CompositionError("f and g use different nonlinearities");
  const auto& tf = f.tensors();
  const auto& tg = g.tensors();
  const std::size_t depth = f.depth();
  Tensors out;
  for (std::size_t l = 0; l < depth; ++l) {
    const Matrix& wf = tf.weights[l];
    const Matrix& wg = tg.weights[l];
    if (l == 0) {
      Matrix w(wf.rows() + wg.rows(), wf.cols());
      w << wf, wg;
      Vector b(wf.rows() + wg.rows());
      b << tf.biases[l], tg.biases[l];
      out.weights.push_back(std::move(w));
      out.biases.push_back(std::move(b));
    } else if (l + 1 < depth) {
      Matrix w = Matrix::Zero(wf.rows() + wg.rows(), wf.cols() + wg.cols());
      w.topLeftCorner(wf.rows(), wf.cols()) = wf;
      w.bottomRightCorner(wg.rows(), wg.cols()) = wg;
      Vector b(wf.rows() + wg.rows());
      b << tf.biases[l], tg.biases[l];
      out.weights.push_back(std::move(w));
      out.biases.push_back(std::move(b));
    } else {
      Matrix w(wf.rows(), wf.cols() + wg.cols());
      w << wf, wg;
      out.weights.push_back(std::move(w));
      out.biases.push_back(tf.biases[l] + tg.biases[l]);
    }
  }
  ExactSum fs, gs, bias;
  accumulate_squares(fs, tf);
  accumulate_squares(gs, tg);
  bias.add_squares(out.biases.back());
  ExactSum separate;
  separate.add_squares(tf.biases.back());
  separate.add_squares(tg.biases.back());
  bias.subtract(separate);
  ExactSum total;
  total.add(fs);
  total.add(gs);
  total.add(bias);
  return ParallelComposition{NetworkParams(std::move(out), f.leaky_slope()), fs.value(), gs.value(), bias.value(),
                             total.value()};
}

}  // namespace rankscope
