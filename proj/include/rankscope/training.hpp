#pragma once

// L2-regularized empirical risk
//   L_lambda(W) = data(W) + (lambda / L) * ||W||^2
// with data = mean squared error (summed over output coordinates) or mean
// softmax cross-entropy; reverse-mode gradients; Adam with decoupled weight
// decay followed by plain gradient descent; and a multi-restart estimator of
// the representation cost.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "rankscope/dataset.hpp"
#include "rankscope/errors.hpp"
#include "rankscope/io.hpp"
#include "rankscope/linalg.hpp"
#include "rankscope/network.hpp"

namespace rankscope {

enum class LossKind { MeanSquared, CrossEntropy };

struct LossParts {
  double total = 0.0;
  double data = 0.0;
  double reg = 0.0;
};

/// How the Adam phase applies the ridge term: decoupled shrinkage
/// (param *= 1 - lr*2*lambda/L) or as a gradient fed through Adam's moments.
enum class WeightDecay { Decoupled, Coupled };

struct TrainConfig {
  double lambda = 0.0;
  double lr = 1e-3;
  std::size_t steps = 1000;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
  std::size_t gd_refine_steps = 0;
  double gd_lr = 1e-4;
  /// Mini-batch size; 0 means full batch.
  std::size_t batch = 0;
  WeightDecay decay_mode = WeightDecay::Decoupled;

  void validate() const {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidConfig("lambda must be finite and >= 0");
    if (!(lr > 0.0) || !std::isfinite(lr)) throw InvalidConfig("lr must be > 0");
    if (!(gd_lr > 0.0) || !std::isfinite(gd_lr)) throw InvalidConfig("gd_lr must be > 0");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
      throw InvalidConfig("adam betas must lie in [0, 1)");
    }
    if (!(adam_eps > 0.0)) throw InvalidConfig("adam epsilon must be > 0");
  }
};

struct TrainHistory {
  std::vector<double> total;
  std::vector<double> data;
  std::vector<double> norm_over_depth;
  /// Entries [0, adam_steps) come from the Adam phase, the rest from GD.
  std::size_t adam_steps = 0;

  std::size_t size() const { return total.size(); }
  void push(const LossParts& l, double norm_over_depth_value) {
    total.push_back(l.total);
    data.push_back(l.data);
    norm_over_depth.push_back(norm_over_depth_value);
  }
};

inline std::string history_csv(const TrainHistory& h) {
  std::ostringstream out;
  out << "step,total,data,norm_over_L\n";
  for (std::size_t i = 0; i < h.size(); ++i) {
    out << i << ',' << io::fmt(h.total[i]) << ',' << io::fmt(h.data[i]) << ',' << io::fmt(h.norm_over_depth[i])
        << '\n';
  }
  return out.str();
}

/// Raised when the loss becomes non-finite; keeps the last finite state.
class DivergenceError : public NumericError {
 public:
  DivergenceError(const std::string& what, NetworkParams last, TrainHistory history)
      : NumericError(what), last_finite(std::move(last)), history(std::move(history)) {}
  NetworkParams last_finite;
  TrainHistory history;
};

/// Targets of a supervised problem: regression outputs or class labels.
using Targets = std::variant<Matrix, std::vector<int>>;

namespace detail {

inline void check_targets(const Tensors& t, const Matrix& x, const Matrix& y) {
  check_input(t, x);
  if (y.cols() != x.cols() || y.rows() != t.weights.back().rows()) {
    throw ShapeError("targets have shape " + std::to_string(y.rows()) + "x" + std::to_string(y.cols()) +
                     ", expected " + std::to_string(t.weights.back().rows()) + "x" + std::to_string(x.cols()));
  }
}

inline void check_targets(const Tensors& t, const Matrix& x, std::span<const int> labels) {
  check_input(t, x);
  if (static_cast<Index>(labels.size()) != x.cols()) throw ShapeError("label count differs from batch size");
  const auto m = t.weights.back().rows();
  for (int c : labels) {
    if (c < 0 || c >= m) {
      throw LabelError("label " + std::to_string(c) + " outside [0, " + std::to_string(m) + ")");
    }
  }
}

/// data term and d(data)/d(output) for squared error.
inline double mse_delta(const Matrix& out, const Matrix& y, Matrix* delta) {
  const double n = static_cast<double>(out.cols());
  Matrix diff = out - y;
  const double data = diff.squaredNorm() / n;
  if (delta) *delta = diff * (2.0 / n);
  return data;
}

/// mean cross-entropy and its gradient w.r.t. the logits.
inline double cross_entropy_delta(const Matrix& logits, std::span<const int> labels, Matrix* delta) {
  const Index n = logits.cols();
  double acc = 0.0;
  if (delta) delta->resize(logits.rows(), n);
  for (Index j = 0; j < n; ++j) {
    const double mx = logits.col(j).maxCoeff();
    const Vector e = (logits.col(j).array() - mx).exp().matrix();
    const double z = e.sum();
    const int c = labels[static_cast<std::size_t>(j)];
    acc += std::log(z) - (logits(c, j) - mx);
    if (delta) {
      delta->col(j) = e / (z * static_cast<double>(n));
      (*delta)(c, j) -= 1.0 / static_cast<double>(n);
    }
  }
  return acc / static_cast<double>(n);
}

inline double data_delta(const Matrix& out, const Targets& target, Matrix* delta) {
  if (const auto* y = std::get_if<Matrix>(&target)) return mse_delta(out, *y, delta);
  return cross_entropy_delta(out, std::get<std::vector<int>>(target), delta);
}

inline void check_targets(const Tensors& t, const Matrix& x, const Targets& target) {
  if (const auto* y = std::get_if<Matrix>(&target)) {
    check_targets(t, x, *y);
  } else {
    check_targets(t, x, std::span<const int>(std::get<std::vector<int>>(target)));
  }
}

/// Reverse pass through the recursion z~_l = W_l z_{l-1} + b_l, z_l = sigma_a(z~_l).
inline void backprop(const Tensors& t, double a, const ActivationTrace& trace, Matrix delta, Tensors& grad) {
  const std::size_t depth = t.depth();
  if (grad.depth() != depth) grad = t.zeros_like();
  for (std::size_t l = depth; l-- > 0;) {
    grad.weights[l].noalias() = delta * trace.activations[l].transpose();
    grad.biases[l] = delta.rowwise().sum();
    if (l == 0) break;
    Matrix prev = t.weights[l].transpose() * delta;
    const Matrix& zt = trace.preactivations[l - 1];
    prev = (zt.array() >= 0.0).select(prev, a * prev);
    delta = std::move(prev);
  }
}

/// Plain (not exactly rounded) ||W||^2 for the per-step training history.
inline double quick_norm(const Tensors& t) {
  double s = 0.0;
  for (std::size_t l = 0; l < t.depth(); ++l) s += t.weights[l].squaredNorm() + t.biases[l].squaredNorm();
  return s;
}

inline double reg_coefficient(std::size_t depth, double lambda) { return lambda / static_cast<double>(depth); }

inline LossParts assemble(double data, double norm, std::size_t depth, double lambda) {
  LossParts l;
  l.data = data;
  l.reg = reg_coefficient(depth, lambda) * norm;
  l.total = l.data + l.reg;
  return l;
}

}  // namespace detail

/// (total, data, reg) with total = data + lambda/L * ||W||^2.
inline LossParts loss_mse_reg(const NetworkParams& p, const Matrix& x, const Matrix& y, double lambda) {
  detail::check_targets(p.tensors(), x, y);
  const double data = detail::mse_delta(evaluate(p, x), y, nullptr);
  return detail::assemble(data, param_norm(p), p.depth(), lambda);
}

/// Mean softmax cross-entropy (no regularization term).
inline double loss_cross_entropy(const NetworkParams& p, const Matrix& x, std::span<const int> labels) {
  detail::check_targets(p.tensors(), x, labels);
  return detail::cross_entropy_delta(evaluate(p, x), labels, nullptr);
}

struct GradResult {
  Tensors grad;
  LossParts loss;
};

/// Gradient of data + lambda/L ||W||^2. The loss kind follows the target:
/// a matrix means squared error, labels mean cross-entropy.
inline GradResult grad(const NetworkParams& p, const Matrix& x, const Targets& target, double lambda) {
  const auto& t = p.tensors();
  detail::check_targets(t, x, target);
  ActivationTrace trace;
  detail::forward_trace(t, p.leaky_slope(), x, trace);
  Matrix delta;
  const double data = detail::data_delta(trace.preactivations.back(), target, &delta);
  GradResult r;
  detail::backprop(t, p.leaky_slope(), trace, std::move(delta), r.grad);
  const double c = 2.0 * detail::reg_coefficient(p.depth(), lambda);
  if (c != 0.0) {
    for (std::size_t l = 0; l < t.depth(); ++l) {
      r.grad.weights[l] += c * t.weights[l];
      r.grad.biases[l] += c * t.biases[l];
    }
  }
  r.loss = detail::assemble(data, param_norm(p), p.depth(), lambda);
  return r;
}

inline Targets targets_of(const Dataset& d) {
  if (d.labels) return *d.labels;
  if (d.Y) return *d.Y;
  throw DimError("dataset has neither targets nor labels");
}

namespace detail {

inline Targets select_columns(const Targets& target, const std::vector<Index>& idx) {
  if (const auto* y = std::get_if<Matrix>(&target)) {
    Matrix out(y->rows(), static_cast<Index>(idx.size()));
    for (std::size_t j = 0; j < idx.size(); ++j) out.col(static_cast<Index>(j)) = y->col(idx[j]);
    return out;
  }
  const auto& lab = std::get<std::vector<int>>(target);
  std::vector<int> out;
  out.reserve(idx.size());
  for (Index i : idx) out.push_back(lab[static_cast<std::size_t>(i)]);
  return out;
}

inline Matrix select_columns(const Matrix& m, const std::vector<Index>& idx) {
  Matrix out(m.rows(), static_cast<Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) out.col(static_cast<Index>(j)) = m.col(idx[j]);
  return out;
}

}  // namespace detail

struct TrainResult {
  NetworkParams params;
  TrainHistory history;
};

/// Adam with weight decay of coefficient 2*lambda/L (the gradient of the ridge
/// term), decoupled by default or folded into the Adam moments when
/// cfg.decay_mode is Coupled, then gradient descent on the full
/// regularized loss. Each GD step backtracks (halving the step) until the
/// loss does not increase, so the refinement phase is monotone.
inline TrainResult train(const NetworkParams& init, const Matrix& x, const Targets& target, const TrainConfig& cfg) {
  cfg.validate();
  Tensors t = init.tensors();
  const double a = init.leaky_slope();
  const std::size_t depth = t.depth();
  detail::check_targets(t, x, target);
  const double inv_depth = 1.0 / static_cast<double>(depth);
  const double decay = 2.0 * detail::reg_coefficient(depth, cfg.lambda);

  TrainHistory hist;
  Tensors m = t.zeros_like(), v = t.zeros_like(), g;
  ActivationTrace trace;
  Matrix delta;
  std::mt19937_64 rng(cfg.seed);
  const Index n = x.cols();
  const bool minibatch = cfg.batch > 0 && static_cast<Index>(cfg.batch) < n;
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  Tensors last_finite = t;

  auto diverged = [&](const char* phase) {
    throw DivergenceError(std::string("non-finite loss during ") + phase, NetworkParams(last_finite, a), hist);
  };

  double b1t = 1.0, b2t = 1.0;
  for (std::size_t step = 0; step < cfg.steps; ++step) {
    double data;
    if (minibatch) {
      std::vector<Index> idx(cfg.batch);
      for (std::size_t i = 0; i < cfg.batch; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, order.size() - 1);
        std::swap(order[i], order[pick(rng)]);
        idx[i] = order[i];
      }
      const Matrix xb = detail::select_columns(x, idx);
      detail::forward_trace(t, a, xb, trace);
      data = detail::data_delta(trace.preactivations.back(), detail::select_columns(target, idx), &delta);
    } else {
      detail::forward_trace(t, a, x, trace);
      data = detail::data_delta(trace.preactivations.back(), target, &delta);
    }
    const double norm = detail::quick_norm(t);
    const LossParts parts = detail::assemble(data, norm, depth, cfg.lambda);
    if (!std::isfinite(parts.total)) diverged("adam");
    last_finite = t;
    hist.push(parts, norm * inv_depth);

    detail::backprop(t, a, trace, std::move(delta), g);
    b1t *= cfg.beta1;
    b2t *= cfg.beta2;
    const double c1 = 1.0 / (1.0 - b1t);
    const double c2 = 1.0 / (1.0 - b2t);
    const bool coupled = cfg.decay_mode == WeightDecay::Coupled;
    auto update = [&](auto& param, auto& grad_, auto& m_, auto& v_) {
      if (coupled) grad_ += decay * param;
      m_ = cfg.beta1 * m_ + (1.0 - cfg.beta1) * grad_;
      v_ = cfg.beta2 * v_ + (1.0 - cfg.beta2) * grad_.cwiseAbs2();
      if (!coupled) param *= (1.0 - cfg.lr * decay);
      param.array() -= cfg.lr * (m_.array() * c1) / ((v_.array() * c2).sqrt() + cfg.adam_eps);
    };
    for (std::size_t l = 0; l < depth; ++l) {
      update(t.weights[l], g.weights[l], m.weights[l], v.weights[l]);
      update(t.biases[l], g.biases[l], m.biases[l], v.biases[l]);
    }
  }
  hist.adam_steps = hist.size();

  if (cfg.gd_refine_steps > 0) {
    ActivationTrace trial_trace;
    detail::forward_trace(t, a, x, trace);
    double data = detail::data_delta(trace.preactivations.back(), target, &delta);
    double norm = detail::quick_norm(t);
    LossParts cur = detail::assemble(data, norm, depth, cfg.lambda);
    if (!std::isfinite(cur.total)) diverged("gradient descent");
    double lr = cfg.gd_lr;
    Tensors trial = t;
    for (std::size_t step = 0; step < cfg.gd_refine_steps; ++step) {
      detail::backprop(t, a, trace, delta, g);
      bool accepted = false;
      for (int attempt = 0; attempt < 40 && !accepted; ++attempt) {
        for (std::size_t l = 0; l < depth; ++l) {
          trial.weights[l] = t.weights[l] - lr * (g.weights[l] + decay * t.weights[l]);
          trial.biases[l] = t.biases[l] - lr * (g.biases[l] + decay * t.biases[l]);
        }
        detail::forward_trace(trial, a, x, trial_trace);
        Matrix trial_delta;
        const double trial_data = detail::data_delta(trial_trace.preactivations.back(), target, &trial_delta);
        const double trial_norm = detail::quick_norm(trial);
        const LossParts next = detail::assemble(trial_data, trial_norm, depth, cfg.lambda);
        if (std::isfinite(next.total) && next.total <= cur.total) {
          std::swap(t, trial);
          std::swap(trace, trial_trace);
          delta = std::move(trial_delta);
          cur = next;
          norm = trial_norm;
          accepted = true;
          lr = std::min(cfg.gd_lr, lr * 2.0);
        } else {
          lr *= 0.5;
        }
      }
      if (!accepted) break;  // no descent direction at working precision
      hist.push(cur, norm * inv_depth);
    }
  }
  if (!t.all_finite()) diverged("training");
  return TrainResult{NetworkParams(std::move(t), a), std::move(hist)};
}

inline TrainResult train(const NetworkParams& init, const Dataset& data, const TrainConfig& cfg) {
  return train(init, data.X, targets_of(data), cfg);
}

struct AnnealStage {
  double lambda = 0.0;
  std::size_t steps = 0;
};

struct ReprCostOptions {
  std::vector<Index> widths;
  double leaky_slope = 0.0;
  double init_scale = 1.0;
  /// Stages run in order with nonincreasing lambda; GD refinement (from
  /// `base`) runs once after the last stage at that stage's lambda.
  std::vector<AnnealStage> schedule;
  TrainConfig base;
  std::size_t restarts = 3;
  double fit_tol = 1e-4;
};

struct ReprCostEstimate {
  /// min ||W||^2 over restarts whose final data term is within fit_tol.
  double estimate = 0.0;
  NetworkParams params;
  std::vector<double> restart_norms;
  std::vector<double> restart_data_terms;
};

/// Upper-bound estimate of the representation cost min ||W||^2 over depth-L
/// networks fitting (X, Y), by regularized training with lambda annealing.
inline ReprCostEstimate estimate_repr_cost(const Matrix& x, const Matrix& y, const ReprCostOptions& opt) {
  if (opt.schedule.empty()) throw InvalidConfig("annealing schedule is empty");
  for (std::size_t i = 1; i < opt.schedule.size(); ++i) {
    if (opt.schedule[i].lambda > opt.schedule[i - 1].lambda) {
      throw InvalidConfig("annealing schedule must have nonincreasing lambda");
    }
  }
  if (opt.restarts == 0) throw InvalidConfig("need at least one restart");
  if (opt.widths.empty() || opt.widths.front() != x.rows() || opt.widths.back() != y.rows()) {
    throw InvalidArchitecture("widths must start at d_in and end at d_out");
  }
  std::optional<NetworkParams> best;
  double best_norm = std::numeric_limits<double>::infinity();
  double best_data = std::numeric_limits<double>::infinity();
  ReprCostEstimate out{0.0, init_network(opt.widths, opt.leaky_slope, 0, 0.0), {}, {}};
  for (std::size_t r = 0; r < opt.restarts; ++r) {
    const std::uint64_t seed = opt.base.seed + r;
    NetworkParams p = init_network(opt.widths, opt.leaky_slope, seed, opt.init_scale);
    for (std::size_t s = 0; s < opt.schedule.size(); ++s) {
      TrainConfig cfg = opt.base;
      cfg.seed = seed;
      cfg.lambda = opt.schedule[s].lambda;
      cfg.steps = opt.schedule[s].steps;
      if (s + 1 < opt.schedule.size()) cfg.gd_refine_steps = 0;
      p = train(p, x, y, cfg).params;
    }
    const double data = loss_mse_reg(p, x, y, 0.0).data;
    const double norm = param_norm(p);
    out.restart_norms.push_back(norm);
    out.restart_data_terms.push_back(data);
    best_data = std::min(best_data, data);
    if (data <= opt.fit_tol && norm < best_norm) {
      best_norm = norm;
      best = p;
    }
  }
  if (!best) {
    throw UnfitError("no restart fit within tolerance " + io::fmt(opt.fit_tol) + "; best data term " +
                     io::fmt(best_data));
  }
  out.estimate = best_norm;
  out.params = std::move(*best);
  return out;
}

/// Same, fitting a closed-form target sampled at the columns of `points`.
inline ReprCostEstimate estimate_repr_cost(const PiecewiseLinearFn& target, const Matrix& points,
                                           const ReprCostOptions& opt) {
  if (points.rows() != target.input_dim) throw ShapeError("sample points do not match target input dimension");
  Matrix y(target.output_dim, points.cols());
  for (Index j = 0; j < points.cols(); ++j) y.col(j) = target.eval(points.col(j));
  return estimate_repr_cost(points, y, opt);
}

}  // namespace rankscope
