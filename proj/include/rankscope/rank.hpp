#pragma once

// Rank certification: Jacobian rank over probes, the Schatten-quasi-norm
// bound, activation spectra per layer, and balancedness of trained weights.

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "rankscope/dataset.hpp"
#include "rankscope/errors.hpp"
#include "rankscope/io.hpp"
#include "rankscope/linalg.hpp"
#include "rankscope/network.hpp"
#include "rankscope/parallel.hpp"

namespace rankscope {

inline std::vector<Vector> columns(const Matrix& m) {
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(m.cols()));
  for (Index j = 0; j < m.cols(); ++j) out.emplace_back(m.col(j));
  return out;
}

/// Default probe set: `uniform` samples from the box plus every training
/// input perturbed by 1e-3 x the box diagonal.
inline std::vector<Vector> default_probes(const DomainBox& box, const Matrix& train_inputs, std::size_t uniform,
                                          std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Index d = box.dim();
  const double scale = 1e-3 * (box.hi - box.lo).norm() / std::sqrt(static_cast<double>(d));
  std::vector<Vector> probes;
  for (std::size_t i = 0; i < uniform; ++i) {
    Vector x(d);
    for (Index k = 0; k < d; ++k) x(k) = box.lo(k) + (box.hi(k) - box.lo(k)) * uni(rng);
    probes.push_back(std::move(x));
  }
  for (Index j = 0; j < train_inputs.cols(); ++j) {
    Vector x = train_inputs.col(j);
    for (Index k = 0; k < d; ++k) x(k) += scale * normal(rng);
    probes.push_back(std::move(x));
  }
  return probes;
}

struct JacobianRank {
  std::size_t rank = 0;
  Vector argmax_probe;
};

/// max over probes of the numerical rank of Jf(x).
inline JacobianRank jacobian_rank(const PiecewiseLinearFn& f, const std::vector<Vector>& probes,
                                  double rel_tol = 1e-3) {
  if (probes.empty()) throw NoProbes("jacobian_rank needs at least one probe");
  std::vector<std::size_t> ranks(probes.size());
  parallel_for(probes.size(), [&](std::size_t i) { ranks[i] = numerical_rank(f.jacobian(probes[i]), rel_tol); });
  const auto best = std::max_element(ranks.begin(), ranks.end());
  return JacobianRank{*best, probes[static_cast<std::size_t>(best - ranks.begin())]};
}

struct SchattenCertificate {
  double max_value = 0.0;
  double bound = 0.0;
  double slack = 0.0;
};

/// max over probes of ||Jf(x)||_{2/L}^{2/L} against the bound ||W||^2 / L.
inline SchattenCertificate schatten_certificate(const NetworkParams& p, const std::vector<Vector>& probes) {
  const double exponent = 2.0 / static_cast<double>(p.depth());
  std::vector<double> values(probes.size(), 0.0);
  parallel_for(probes.size(), [&](std::size_t i) { values[i] = schatten_norm(jacobian(p, probes[i]).jacobian, exponent); });
  SchattenCertificate c;
  for (double v : values) c.max_value = std::max(c.max_value, v);
  c.bound = param_norm(p) / static_cast<double>(p.depth());
  c.slack = c.bound - c.max_value;
  return c;
}

struct BottleneckProfile {
  /// Spectra of the hidden activations Z_1 .. Z_{L-1}.
  std::vector<SingularSpectrum> spectra;
  std::vector<double> ratios;
  /// ||Z~_l - Z_l||_F / ||Z~_l||_F per hidden layer.
  std::vector<double> nonlinearity_impact;
  /// 1-based hidden layer with the smallest s_2/s_1.
  std::size_t bottleneck_layer = 0;
  double bottleneck_ratio = 0.0;

  std::vector<std::size_t> ranks(double rel_tol = 1e-3) const {
    std::vector<std::size_t> r;
    for (const auto& s : spectra) r.push_back(numerical_rank(s, rel_tol));
    return r;
  }
};

inline BottleneckProfile bottleneck_profile(const NetworkParams& p, const Matrix& x) {
  if (p.depth() < 2) throw DepthError("bottleneck_profile needs at least one hidden layer");
  if (x.cols() < 2) throw DegenerateBatch("bottleneck_profile needs at least two inputs");
  if (((x.colwise() - x.col(0)).array() == 0.0).all()) throw DegenerateBatch("all inputs in the batch are equal");
  const ForwardResult fr = forward(p, x);
  BottleneckProfile prof;
  prof.bottleneck_ratio = std::numeric_limits<double>::infinity();
  for (std::size_t l = 1; l < p.depth(); ++l) {
    const Matrix& z = fr.trace.activations[l];
    const Matrix& zt = fr.trace.preactivations[l - 1];
    prof.spectra.push_back(singular_values(z));
    const double ratio = prof.spectra.back().second_ratio();
    prof.ratios.push_back(ratio);
    const double denom = zt.norm();
    prof.nonlinearity_impact.push_back(denom > 0.0 ? (zt - z).norm() / denom : 0.0);
    if (ratio < prof.bottleneck_ratio) {
      prof.bottleneck_ratio = ratio;
      prof.bottleneck_layer = l;
    }
  }
  return prof;
}

/// |(||W_l||^2 + ||b_l||^2) - ||W_{l+1}||^2| / max(||W_{l+1}||^2, 1e-12) for l = 1..L-1.
inline std::vector<double> balancedness_residuals(const NetworkParams& p) {
  if (p.depth() < 2) throw DepthError("balancedness needs depth >= 2");
  std::vector<double> out;
  for (std::size_t l = 0; l + 1 < p.depth(); ++l) {
    const double lhs = squared_norm(p.weight(l)) + p.bias(l).squaredNorm();
    const double rhs = squared_norm(p.weight(l + 1));
    out.push_back(std::fabs(lhs - rhs) / std::max(rhs, 1e-12));
  }
  return out;
}

struct RankReport {
  std::size_t jacobian_rank = 0;
  double rank_tolerance = 1e-3;
  double schatten_value = 0.0;
  double norm_over_L = 0.0;
  double bound_slack = 0.0;
  std::size_t bottleneck_layer = 0;
  double bottleneck_ratio = 0.0;
  std::vector<double> balancedness_residuals;
  std::size_t probe_count = 0;
};

inline RankReport certify(const NetworkParams& p, const std::vector<Vector>& probes, const Matrix& batch,
                          double rel_tol = 1e-3) {
  RankReport r;
  r.rank_tolerance = rel_tol;
  r.probe_count = probes.size();
  r.jacobian_rank = jacobian_rank(as_function(p), probes, rel_tol).rank;
  const auto cert = schatten_certificate(p, probes);
  r.schatten_value = cert.max_value;
  r.norm_over_L = cert.bound;
  r.bound_slack = cert.slack;
  if (p.depth() >= 2) {
    const auto prof = bottleneck_profile(p, batch);
    r.bottleneck_layer = prof.bottleneck_layer;
    r.bottleneck_ratio = prof.bottleneck_ratio;
    r.balancedness_residuals = balancedness_residuals(p);
  }
  return r;
}

inline std::string join_reals(const std::vector<double>& v, char sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? std::string(1, sep) : "") + io::fmt(v[i]);
  return out;
}

inline std::string report_kv(const RankReport& r) {
  std::ostringstream out;
  out << "jacobian_rank " << r.jacobian_rank << '\n'
      << "rank_tolerance " << io::fmt(r.rank_tolerance) << '\n'
      << "schatten_value " << io::fmt(r.schatten_value) << '\n'
      << "norm_over_L " << io::fmt(r.norm_over_L) << '\n'
      << "bound_slack " << io::fmt(r.bound_slack) << '\n'
      << "bottleneck_layer " << r.bottleneck_layer << '\n'
      << "bottleneck_ratio " << io::fmt(r.bottleneck_ratio) << '\n'
      << "balancedness_residuals " << join_reals(r.balancedness_residuals, ' ') << '\n'
      << "probe_count " << r.probe_count << '\n';
  return out.str();
}

inline RankReport parse_report_kv(const std::string& text) {
  RankReport r;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto tok = io::split_ws(line);
    if (tok.empty()) continue;
    const std::string& key = tok[0];
    auto one = [&]() -> const std::string& {
      if (tok.size() != 2) throw FormatError("report field '" + key + "' needs one value");
      return tok[1];
    };
    if (key == "jacobian_rank") r.jacobian_rank = static_cast<std::size_t>(io::parse_int(one()));
    else if (key == "rank_tolerance") r.rank_tolerance = io::parse_double(one());
    else if (key == "schatten_value") r.schatten_value = io::parse_double(one());
    else if (key == "norm_over_L") r.norm_over_L = io::parse_double(one());
    else if (key == "bound_slack") r.bound_slack = io::parse_double(one());
    else if (key == "bottleneck_layer") r.bottleneck_layer = static_cast<std::size_t>(io::parse_int(one()));
    else if (key == "bottleneck_ratio") r.bottleneck_ratio = io::parse_double(one());
    else if (key == "probe_count") r.probe_count = static_cast<std::size_t>(io::parse_int(one()));
    else if (key == "balancedness_residuals") {
      r.balancedness_residuals.clear();
      for (std::size_t i = 1; i < tok.size(); ++i) r.balancedness_residuals.push_back(io::parse_double(tok[i]));
    } else {
      throw FormatError("unknown report field '" + key + "'");
    }
  }
  return r;
}

inline constexpr const char* kReportCsvHeader =
    "jacobian_rank,rank_tolerance,schatten_value,norm_over_L,bound_slack,bottleneck_layer,bottleneck_ratio,"
    "balancedness_residuals,probe_count";

/// One CSV row; residuals are ';'-joined inside their cell.
inline std::string report_csv_row(const RankReport& r) {
  std::ostringstream out;
  out << r.jacobian_rank << ',' << io::fmt(r.rank_tolerance) << ',' << io::fmt(r.schatten_value) << ','
      << io::fmt(r.norm_over_L) << ',' << io::fmt(r.bound_slack) << ',' << r.bottleneck_layer << ','
      << io::fmt(r.bottleneck_ratio) << ',' << join_reals(r.balancedness_residuals, ';') << ',' << r.probe_count;
  return out.str();
}

}  // namespace rankscope
