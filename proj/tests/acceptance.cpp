// Acceptance runner: `acceptance <id>` evaluates one criterion, prints a
// single PASS/FAIL line (indented detail lines before it) and exits 0 on PASS.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "rankscope/checkpoint.hpp"
#include "rankscope/datagen.hpp"
#include "rankscope/interpolate.hpp"
#include "rankscope/krr.hpp"
#include "rankscope/network.hpp"
#include "rankscope/rank.hpp"
#include "rankscope/topology.hpp"
#include "rankscope/training.hpp"
#include "rankscope/tsp.hpp"

using namespace rankscope;

namespace {

struct Outcome {
  bool pass = false;
  std::string summary;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

void detail_line(const std::string& s) { std::cout << "  " << s << std::endl; }

std::vector<Index> mlp_widths(Index d_in, Index width, int depth, Index d_out) {
  std::vector<Index> w{d_in};
  for (int i = 1; i < depth; ++i) w.push_back(width);
  w.push_back(d_out);
  return w;
}

NetworkParams with_random_biases(const NetworkParams& p, std::mt19937_64& rng, double sd = 0.5) {
  Tensors t = p.tensors();
  std::normal_distribution<double> n(0.0, sd);
  for (auto& b : t.biases)
    for (Index i = 0; i < b.size(); ++i) b(i) = n(rng);
  return NetworkParams(std::move(t), p.leaky_slope());
}

NetworkParams random_network(std::mt19937_64& rng, Index d_in, Index d_out, int max_depth, Index max_width,
                             double slope) {
  std::uniform_int_distribution<int> depth(1, max_depth);
  std::uniform_int_distribution<Index> width(1, max_width);
  std::vector<Index> w{d_in};
  const int l = depth(rng);
  for (int i = 1; i < l; ++i) w.push_back(width(rng));
  w.push_back(d_out);
  return with_random_biases(init_network(w, slope, rng(), 1.0), rng);
}

NetworkParams identity_chain(Index k, std::size_t depth) {
  Tensors t;
  for (std::size_t l = 0; l < depth; ++l) {
    t.weights.push_back(Matrix::Identity(k, k));
    t.biases.push_back(Vector::Zero(k));
  }
  return NetworkParams(std::move(t), 0.0);
}

bool same_bits(const Tensors& a, const Tensors& b) {
  if (a.weights.size() != b.weights.size()) return false;
  for (std::size_t l = 0; l < a.weights.size(); ++l) {
    const Matrix& wa = a.weights[l];
    const Matrix& wb = b.weights[l];
    const Vector& ba = a.biases[l];
    const Vector& bb = b.biases[l];
    if (wa.rows() != wb.rows() || wa.cols() != wb.cols() || ba.size() != bb.size()) return false;
    if (std::memcmp(wa.data(), wb.data(), sizeof(double) * static_cast<std::size_t>(wa.size())) != 0) return false;
    if (std::memcmp(ba.data(), bb.data(), sizeof(double) * static_cast<std::size_t>(ba.size())) != 0) return false;
  }
  return true;
}

// ------------------------------------------------------------------ 1

Outcome jacobian_fd() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  // Inside one activation region the map is affine, so a wide step only
  // reduces cancellation; steps that leave the region are rejected.
  const double h = 1e-4;
  std::size_t worst_net_ok = 100, nets_passing = 0, total_rejected = 0;
  double worst_err = 0.0;
  for (int net = 0; net < 50; ++net) {
    std::uniform_int_distribution<Index> dim(1, 8);
    const double slope = net % 3 == 0 ? 0.0 : (net % 3 == 1 ? 0.2 : -0.4);
    const NetworkParams p = random_network(rng, dim(rng), dim(rng), 6, 32, slope);
    std::size_t accepted = 0, ok = 0;
    for (int probe = 0; probe < 100; ++probe) {
      const Vector x = oracle::gaussian(p.input_dim(), 1, rng);
      const auto pattern = activation_pattern(p, x);
      bool crosses = false;
      for (Index k = 0; k < x.size() && !crosses; ++k) {
        for (double s : {-h, h}) {
          Vector y = x;
          y(k) += s;
          if (activation_pattern(p, y) != pattern) crosses = true;
        }
      }
      if (crosses) {
        ++total_rejected;
        continue;
      }
      ++accepted;
      const Matrix fd = oracle::central_jacobian([&](const Vector& v) { return evaluate_point(p, v); }, x, h);
      const double err = oracle::relative_error(jacobian(p, x).jacobian, fd);
      worst_err = std::max(worst_err, err);
      ok += err < 1e-6;
    }
    const bool pass = accepted > 0 && static_cast<double>(ok) >= 0.99 * static_cast<double>(accepted);
    nets_passing += pass;
    if (accepted > 0) worst_net_ok = std::min(worst_net_ok, 100 * ok / accepted);
  }
  const double secs = seconds_since(t0);
  return {nets_passing == 50 && secs < 30.0,
          std::to_string(nets_passing) + "/50 networks at >= 99% of probes, worst per-net agreement " +
              std::to_string(worst_net_ok) + "%, max rel err " + fmt(worst_err) + ", " +
              std::to_string(total_rejected) + " boundary probes rejected, " + fmt(secs) + " s"};
}

// ------------------------------------------------------------------ 2

Outcome schatten_certificate_suite() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(202);
  std::vector<NetworkParams> suite;
  for (int i = 0; i < 40; ++i) {
    const double slope = i % 4 == 0 ? 0.0 : (i % 4 == 1 ? 0.3 : (i % 4 == 2 ? -0.5 : 0.9));
    suite.push_back(random_network(rng, 3, 2, 7, 12, slope));
  }
  for (std::size_t depth : {1u, 3u, 8u}) suite.push_back(identity_chain(2, depth));
  {
    const NetworkParams g = random_network(rng, 3, 2, 3, 8, 0.0);
    const NetworkParams h = random_network(rng, 2, 2, 3, 8, 0.0);
    const Matrix pts = evaluate(g, oracle::gaussian(3, 500, rng));
    suite.push_back(compose_serial(g, h, g.depth() + h.depth() + 4, bounding_box(pts)).network);
  }
  {
    const NetworkParams f = with_random_biases(init_network({3, 6, 6, 2}, 0.0, rng(), 1.0), rng);
    const NetworkParams g = with_random_biases(init_network({3, 5, 4, 2}, 0.0, rng(), 1.0), rng);
    suite.push_back(compose_parallel(f, g).network);
  }
  for (double a : {0.5, -0.3}) {
    suite.push_back(convert_relu_to_leaky(random_network(rng, 3, 2, 5, 8, 0.0), a));
  }
  for (std::size_t depth : {3u, 6u}) {
    suite.push_back(rank1_interpolator(oracle::gaussian(3, 12, rng), oracle::gaussian(2, 12, rng), depth, rng()));
  }
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const Dataset d = synth_lowrank(3, 2, 2, 1, 40, seed, 16);
    TrainConfig cfg;
    cfg.lambda = 1e-2;
    cfg.lr = 3e-3;
    cfg.steps = 2000;
    cfg.seed = seed;
    suite.push_back(train(init_network({3, 12, 12, 12, 2}, seed % 2 ? 0.1 : 0.0, seed), d, cfg).params);
  }
  double min_slack = std::numeric_limits<double>::infinity();
  for (const auto& p : suite) {
    const auto probes = columns(oracle::gaussian(p.input_dim(), 100, rng));
    min_slack = std::min(min_slack, schatten_certificate(p, probes).slack);
  }
  double worst_tight = 0.0;
  for (Index k = 1; k <= 4; ++k) {
    for (std::size_t depth : {1u, 2u, 5u, 9u}) {
      const auto c = schatten_certificate(identity_chain(k, depth), columns(oracle::gaussian(k, 20, rng)));
      worst_tight = std::max(worst_tight, std::fabs(c.slack));
    }
  }
  const double secs = seconds_since(t0);
  return {min_slack >= -1e-9 && worst_tight <= 1e-9 && secs < 60.0,
          std::to_string(suite.size()) + " networks, min slack " + fmt(min_slack) + ", identity-chain |slack| <= " +
              fmt(worst_tight) + ", " + fmt(secs) + " s"};
}

// ------------------------------------------------------------------ 3

Outcome composition_ledgers() {
  std::mt19937_64 rng(303);
  bool ledger_exact = true, parallel_exact = true;
  double serial_err = 0.0, parallel_err = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const NetworkParams g = with_random_biases(init_network({4, 10, 3}, 0.0, rng(), 1.0), rng);
    const NetworkParams h = with_random_biases(init_network({3, 10, 10, 2}, 0.0, rng(), 1.0), rng);
    const Matrix x = oracle::gaussian(4, 1000, rng);
    const Matrix gx = evaluate(g, x);
    const auto c = compose_serial(g, h, 10, bounding_box(gx));
    ledger_exact &= param_norm(c.network) == c.ledger.total;
    ledger_exact &= c.ledger.g_norm == param_norm(g) && c.ledger.h_norm == param_norm(h);
    ledger_exact &= c.ledger.identity_cost == 3.0 * 5.0;
    serial_err = std::max(serial_err, (evaluate(c.network, x) - evaluate(h, gx)).cwiseAbs().maxCoeff());

    const NetworkParams f1 = with_random_biases(init_network({4, 7, 5, 2}, 0.0, rng(), 1.0), rng);
    const NetworkParams f2 = with_random_biases(init_network({4, 3, 6, 2}, 0.0, rng(), 1.0), rng);
    const auto par = compose_parallel(f1, f2);
    parallel_exact &= par.total == param_norm(par.network);
    parallel_exact &= par.f_norm == param_norm(f1) && par.g_norm == param_norm(f2);
    Tensors zero_out = f2.tensors();
    zero_out.biases.back().setZero();
    const NetworkParams f2z(std::move(zero_out), 0.0);
    const auto additive = compose_parallel(f1, f2z);
    parallel_exact &= additive.output_bias_cost == 0.0;
    ExactSum squares;
    accumulate_squares(squares, f1.tensors());
    accumulate_squares(squares, f2z.tensors());
    parallel_exact &= param_norm(additive.network) == squares.value() && additive.total == squares.value();
    parallel_err = std::max(parallel_err, (evaluate(par.network, x) - evaluate(f1, x) - evaluate(f2, x)).cwiseAbs().maxCoeff());
  }
  return {ledger_exact && parallel_exact && serial_err <= 1e-10 && parallel_err <= 1e-10,
          std::string("serial ledger exact: ") + (ledger_exact ? "yes" : "no") + ", parallel additivity exact: " +
              (parallel_exact ? "yes" : "no") + ", max |composed - h(g(x))| " + fmt(serial_err) +
              ", max |parallel - (f + g)| " + fmt(parallel_err)};
}

// ------------------------------------------------------------------ 4

Outcome leaky_conversion() {
  std::mt19937_64 rng(404);
  double worst = 0.0;
  for (int depth = 2; depth <= 5; ++depth) {
    for (double a : {-0.5, 0.1, 0.5, 0.9}) {
      const NetworkParams relu =
          with_random_biases(init_network(mlp_widths(5, 12, depth, 3), 0.0, rng(), 1.0), rng);
      const NetworkParams leaky = convert_relu_to_leaky(relu, a);
      const Matrix x = oracle::gaussian(5, 1000, rng, 2.0);
      worst = std::max(worst, (evaluate(leaky, x) - evaluate(relu, x)).cwiseAbs().maxCoeff());
    }
  }
  return {worst <= 1e-10, "max |converted - original| over depths 2-5 and 4 slopes: " + fmt(worst)};
}

// ------------------------------------------------------------------ 5

Outcome balancedness() {
  const auto t0 = Clock::now();
  int passing = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Dataset d = synth_lowrank(4, 4, 4, 2, 64, seed, 16);
    TrainConfig cfg;
    cfg.lambda = 1e-3;
    cfg.lr = 2e-3;
    cfg.steps = 100000;
    cfg.gd_refine_steps = 20000;
    cfg.gd_lr = 1e-2;
    cfg.seed = seed;
    cfg.decay_mode = WeightDecay::Coupled;
    const auto r = train(init_network(mlp_widths(4, 16, 6, 4), 0.0, seed + 100), d, cfg);
    const auto res = balancedness_residuals(r.params);
    const double worst = *std::max_element(res.begin(), res.end());
    passing += worst < 0.05;
    detail_line("seed " + std::to_string(seed) + ": max residual " + fmt(worst) + ", data term " +
                fmt(r.history.data.back()));
  }
  const double secs = seconds_since(t0);
  return {passing >= 4 && secs < 300.0, std::to_string(passing) + "/5 seeds with all residuals < 0.05, " + fmt(secs) + " s"};
}

// ------------------------------------------------------------------ 6

Outcome bottleneck_reproduction() {
  const auto t0 = Clock::now();
  const int depth = 8;
  int passing = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Dataset d = synth_lowrank(10, 10, 5, 2, 200, seed, 100);
    TrainConfig cfg;
    cfg.lambda = 0.05;
    cfg.lr = 2e-3;
    cfg.steps = 60000;
    cfg.gd_refine_steps = 5000;
    cfg.gd_lr = 1e-3;
    cfg.seed = seed;
    cfg.decay_mode = WeightDecay::Coupled;
    const auto r = train(init_network(mlp_widths(10, 40, depth, 10), 0.0, seed + 100), d, cfg);
    const double data = r.history.data.back();
    const double norm_over_l = r.history.norm_over_depth.back();
    const auto prof = bottleneck_profile(r.params, d.X);
    const auto ranks = prof.ranks(1e-3);
    std::size_t run = 0, best_run = 0;
    for (std::size_t l = 0; l < ranks.size(); ++l) {
      run = ranks[l] == 2 && prof.nonlinearity_impact[l] < 0.1 ? run + 1 : 0;
      best_run = std::max(best_run, run);
    }
    const bool ok = data < 1e-3 && best_run >= 2 && norm_over_l >= 2.0 && norm_over_l <= 4.5;
    passing += ok;
    std::string rank_list, impact_list;
    for (std::size_t l = 0; l < ranks.size(); ++l) {
      rank_list += (l ? "," : "") + std::to_string(ranks[l]);
      impact_list += (l ? "," : "") + fmt(prof.nonlinearity_impact[l]);
    }
    detail_line("seed " + std::to_string(seed) + ": data " + fmt(data) + ", norm/L " + fmt(norm_over_l) +
                ", hidden ranks [" + rank_list + "], impact [" + impact_list + "]");
  }
  const double secs = seconds_since(t0);
  return {passing >= 3 && secs < 1200.0, std::to_string(passing) + "/5 seeds reproduce the rank-2 plateau, " + fmt(secs) + " s"};
}

// ------------------------------------------------------------------ 7

Outcome tsp_trend() {
  const auto t0 = Clock::now();
  const Dataset d = synth_lowrank(4, 4, 2, 2, 400, 707, 16);
  const std::vector<Index> sizes{50, 100, 200, 400};
  std::vector<double> lx, ly;
  bool bound_ok = true;
  for (Index n : sizes) {
    const Matrix x = d.X.leftCols(n), y = d.Y->leftCols(n);
    const double len = tsp_path(y, TspMode::Heuristic).length;
    lx.push_back(std::log(static_cast<double>(n)));
    ly.push_back(std::log(len));
    for (std::size_t depth : {3u, 6u}) {
      const auto p = rank1_interpolator(x, y, depth, 7);
      const double bound = tsp_lower_bound(x, y, depth, TspMode::Heuristic).norm_lower_bound;
      bound_ok &= param_norm(p) >= bound - 1e-6;
    }
    detail_line("N=" + std::to_string(n) + ": path length " + fmt(len));
  }
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / 4, my = std::accumulate(ly.begin(), ly.end(), 0.0) / 4;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  const double slope = sxy / sxx;
  const double secs = seconds_since(t0);
  return {std::fabs(slope - 0.5) <= 0.15 && bound_ok && secs < 300.0,
          "log-log slope " + fmt(slope) + ", interpolator above bound on every instance: " +
              (bound_ok ? "yes" : "no") + ", " + fmt(secs) + " s"};
}

// ------------------------------------------------------------------ 8

Outcome tsp_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(808);
  std::uniform_int_distribution<Index> count(2, 9), dim(1, 4);
  int within = 0;
  double worst = 1.0;
  for (int trial = 0; trial < 200; ++trial) {
    const Matrix pts = oracle::gaussian(dim(rng), count(rng), rng);
    const double brute = oracle::brute_force_path(pts);
    const double heur = tsp_path(pts, TspMode::Heuristic).length;
    const double ratio = brute > 0 ? heur / brute : 1.0;
    worst = std::max(worst, ratio);
    within += heur <= 1.05 * brute;
  }
  const double secs = seconds_since(t0);
  return {within == 200 && secs < 60.0,
          std::to_string(within) + "/200 instances within 5%, worst ratio " + fmt(worst) + ", " + fmt(secs) + " s"};
}

// ------------------------------------------------------------------ 9

Outcome krr_contrast() {
  const auto t0 = Clock::now();
  const Index d_in = 6, d_out = 4, latent = 6, k = 2, n = 100, gen_width = 100;
  int passing = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Dataset d = synth_lowrank(d_in, d_out, latent, k, n, seed, gen_width);
    std::mt19937_64 noise_rng(seed ^ 0xC0FFEE);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < d_out; ++i) (*d.Y)(i, j) += 1e-3 * normal(noise_rng);

    // Probes: fresh draws from the input distribution plus the training inputs.
    const auto gen = make_lowrank_generator(d_in, d_out, latent, k, *d.meta.seed, gen_width);
    std::mt19937_64 probe_rng(seed + 77);
    auto probes = columns(gen.inputs_from_latent(detail::standard_normal(latent, 500, probe_rng)));
    const auto near_data = default_probes(bounding_box(d.X), d.X, 0, seed + 5);
    probes.insert(probes.end(), near_data.begin(), near_data.end());

    const std::size_t kr = krr_rank(krr_fit(d.X, *d.Y, 1e-3), probes);

    TrainConfig cfg;
    cfg.lambda = 0.02;
    cfg.lr = 2e-3;
    cfg.steps = 150000;
    cfg.gd_refine_steps = 10000;
    cfg.gd_lr = 1e-3;
    cfg.seed = seed;
    cfg.decay_mode = WeightDecay::Coupled;
    const auto r = train(init_network(mlp_widths(d_in, 32, 8, d_out), 0.0, seed + 100), d, cfg);
    const std::size_t nr = jacobian_rank(as_function(r.params), probes).rank;
    passing += kr == 4 && nr == 2;
    detail_line("seed " + std::to_string(seed) + ": krr_rank " + std::to_string(kr) + ", network jacobian_rank " +
                std::to_string(nr) + ", data term " + fmt(r.history.data.back()));
  }
  return {passing >= 4, std::to_string(passing) + "/5 seeds with krr_rank 4 and network rank 2, " +
                            fmt(seconds_since(t0)) + " s"};
}

// ------------------------------------------------------------------ 10

Outcome xcross() {
  const auto f = xcross_fixture();
  std::mt19937_64 rng(1010);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<Vector> probes;
  for (int i = 0; i < 1000; ++i) probes.push_back(Vector{{u(rng), u(rng)}});
  const std::size_t rank = jacobian_rank(f, probes).rank;

  // Region boundaries: the diagonals |x0| = |x1| and the axes.
  double jump = 0.0;
  const double eps = 1e-12;
  for (int i = 0; i < 1000; ++i) {
    const double t = u(rng);
    const Vector ends[] = {Vector{{t, t}}, Vector{{t, -t}}, Vector{{t, 0.0}}, Vector{{0.0, t}}};
    for (const Vector& b : ends) {
      const Vector fb = f.eval(b);
      for (int dir = 0; dir < 8; ++dir) {
        const double ang = M_PI * dir / 4.0;
        const Vector off{{eps * std::cos(ang), eps * std::sin(ang)}};
        jump = std::max(jump, (f.eval(b + off) - fb).norm());
      }
    }
  }
  bool identity = true;
  for (int i = 0; i < 1000; ++i) {
    const double t = u(rng);
    identity &= f.eval(Vector{{t, t}}) == Vector{{t, t}} && f.eval(Vector{{t, -t}}) == Vector{{t, -t}};
  }
  return {rank == 1 && jump <= 1e-9 && identity,
          "jacobian_rank " + std::to_string(rank) + " over 1000 probes, max change across boundaries " + fmt(jump) +
              ", identity on the cross exact: " + (identity ? "yes" : "no")};
}

// ------------------------------------------------------------------ 11

Outcome tripoint_counts() {
  const auto t0 = Clock::now();
  int passing = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Dataset d = s_shape_classes(4, 50, seed);
    const DomainBox box = bounding_box(d.X);
    const Vector pad = 0.25 * (box.hi - box.lo);
    const Grid2D grid{box.lo(0) - pad(0), box.hi(0) + pad(0), box.lo(1) - pad(1), box.hi(1) + pad(1), 150, 150};
    std::size_t counts[2];
    for (int i = 0; i < 2; ++i) {
      const int depth = i == 0 ? 2 : 9;
      TrainConfig cfg;
      cfg.lambda = 1e-3;
      cfg.lr = 1e-3;
      cfg.steps = 20000;
      cfg.seed = seed;
      cfg.decay_mode = WeightDecay::Coupled;
      const auto r = train(init_network(mlp_widths(2, 32, depth, 4), 0.0, seed + 100), d, cfg);
      counts[i] = count_clusters(tripoints(as_function(r.params), grid), 1.5 * grid.spacing());
    }
    passing += counts[1] <= counts[0];
    detail_line("seed " + std::to_string(seed) + ": tripoints L=2 " + std::to_string(counts[0]) + ", L=9 " +
                std::to_string(counts[1]));
  }
  return {passing >= 3, std::to_string(passing) + "/5 seeds with deep count <= shallow count, " +
                            fmt(seconds_since(t0)) + " s"};
}

// ------------------------------------------------------------------ 12

Outcome denoising() {
  const auto t0 = Clock::now();
  int passing = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Dataset d = curve1d_in_plane(100, seed);
    const CurveGenerator gen = make_curve_generator(*d.meta.seed);
    ManifoldSampler sampler;
    sampler.sample = [&](Index count, std::mt19937_64& rng) { return gen.map(detail::standard_normal(1, count, rng)); };
    sampler.dense = gen.dense(20001);
    const double noise = 0.2 * gen.extent();
    double ratio[2];
    for (int i = 0; i < 2; ++i) {
      const int depth = i == 0 ? 2 : 6;
      TrainConfig cfg;
      cfg.lambda = 1e-3;
      cfg.lr = 1e-3;
      cfg.steps = 20000;
      cfg.seed = seed;
      cfg.decay_mode = WeightDecay::Coupled;
      const auto r = train(init_network(mlp_widths(2, 32, depth, 2), 0.0, seed + 100), d, cfg);
      ratio[i] = denoising_score(r.params, sampler, noise, 300, seed + 9);
    }
    passing += ratio[1] < ratio[0];
    detail_line("seed " + std::to_string(seed) + ": denoising ratio L=2 " + fmt(ratio[0]) + ", L=6 " + fmt(ratio[1]));
  }
  return {passing >= 3, std::to_string(passing) + "/5 seeds with deep ratio < shallow ratio, " +
                            fmt(seconds_since(t0)) + " s"};
}

// ------------------------------------------------------------------ 13

std::string be32(std::uint32_t v) {
  std::string s(4, '\0');
  for (int i = 0; i < 4; ++i) s[static_cast<std::size_t>(i)] = static_cast<char>((v >> (24 - 8 * i)) & 0xFF);
  return s;
}

Outcome determinism_formats() {
  auto run_once = [] {
    const Dataset d = synth_lowrank(4, 3, 2, 1, 30, 1313, 8);
    TrainConfig cfg;
    cfg.lambda = 1e-2;
    cfg.steps = 300;
    cfg.gd_refine_steps = 20;
    cfg.batch = 8;
    cfg.seed = 1313;
    const auto r = train(init_network({4, 8, 8, 3}, 0.0, 1313), d, cfg);
    const auto report = certify(r.params, default_probes(bounding_box(d.X), d.X, 50, 1313), d.X);
    return std::vector<std::string>{dataset_csv(d), history_csv(r.history), report_csv_row(report),
                                    to_checkpoint(r.params)};
  };
  const auto a = run_once(), b = run_once();
  const bool csv_identical = a == b;

  std::mt19937_64 rng(1314);
  bool round_trip = true;
  for (int i = 0; i < 20; ++i) {
    NetworkParams p = random_network(rng, 3, 2, 5, 10, i % 2 ? 0.25 : 0.0);
    Tensors t = p.tensors();
    t.weights[0](0, 0) = std::numeric_limits<double>::denorm_min();
    t.biases[0](0) = -0.0;
    p = NetworkParams(std::move(t), p.leaky_slope());
    const std::string text = to_checkpoint(p);
    const NetworkParams back = from_checkpoint(text);
    round_trip &= same_bits(back.tensors(), p.tensors()) && back.leaky_slope() == p.leaky_slope();
    round_trip &= to_checkpoint(back) == text;
  }

  std::string images = be32(0x00000803) + be32(2) + be32(3) + be32(3);
  for (int i = 0; i < 9; ++i) images.push_back(static_cast<char>(10 * i));
  for (int i = 0; i < 9; ++i) images.push_back(static_cast<char>(255 - i));
  const std::string labels = be32(0x00000801) + be32(2) + std::string{'\x07', '\x02'};
  const Matrix x = parse_idx_images(images);
  bool idx = x.rows() == 9 && x.cols() == 2;
  for (int i = 0; idx && i < 9; ++i) idx &= x(i, 0) == 10.0 * i / 255.0 && x(i, 1) == (255.0 - i) / 255.0;
  idx &= parse_idx_labels(labels) == std::vector<int>{7, 2};

  return {csv_identical && round_trip && idx, std::string("rerun outputs byte-identical: ") + (csv_identical ? "yes" : "no") +
                                                  ", checkpoint round-trip exact: " + (round_trip ? "yes" : "no") +
                                                  ", IDX authored bytes: " + (idx ? "yes" : "no")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<int, std::pair<const char*, std::function<Outcome()>>> criteria{
      {1, {"jacobian_fd", jacobian_fd}},
      {2, {"schatten_certificate", schatten_certificate_suite}},
      {3, {"composition_ledgers", composition_ledgers}},
      {4, {"leaky_conversion", leaky_conversion}},
      {5, {"balancedness", balancedness}},
      {6, {"bottleneck_reproduction", bottleneck_reproduction}},
      {7, {"tsp_trend", tsp_trend}},
      {8, {"tsp_oracle", tsp_oracle}},
      {9, {"krr_contrast", krr_contrast}},
      {10, {"xcross_fixture", xcross}},
      {11, {"tripoints", tripoint_counts}},
      {12, {"denoising", denoising}},
      {13, {"determinism_formats", determinism_formats}},
  };
  std::vector<int> ids;
  if (argc < 2) {
    for (const auto& [id, _] : criteria) ids.push_back(id);
  } else {
    for (int i = 1; i < argc; ++i) ids.push_back(std::atoi(argv[i]));
  }
  bool all = true;
  for (int id : ids) {
    const auto it = criteria.find(id);
    if (it == criteria.end()) {
      std::cerr << "unknown criterion " << id << "\n";
      return 2;
    }
    Outcome o;
    try {
      o = it->second.second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    all &= o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << id << " " << it->second.first << ": " << o.summary << std::endl;
  }
  return all ? 0 : 1;
}
