#pragma once

// Experiment harness behind the command-line tool: a flat key = value
// config, dataset construction, and one function per subcommand. Every
// command is deterministic given its config and writes files atomically.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "rankscope/checkpoint.hpp"
#include "rankscope/datagen.hpp"
#include "rankscope/errors.hpp"
#include "rankscope/interpolate.hpp"
#include "rankscope/io.hpp"
#include "rankscope/krr.hpp"
#include "rankscope/network.hpp"
#include "rankscope/parallel.hpp"
#include "rankscope/rank.hpp"
#include "rankscope/svg.hpp"
#include "rankscope/training.hpp"
#include "rankscope/tsp.hpp"

namespace rankscope::cli {

namespace fs = std::filesystem;

enum class TaskKind { Regress, Classify, Autoencode, Bound, Krr, Construct };

struct DataSpec {
  std::string kind = "lowrank";  // lowrank | sshape | curve1d | csv | idx
  std::string path;
  std::string labels_path;
  Index n = 200;
  Index d_in = 10;
  Index d_out = 10;
  Index latent = 5;
  Index rank = 2;
  Index gen_width = 100;
  int classes = 4;
  double noise = 0.0;
  std::uint64_t seed = 0;
};

struct ExperimentConfig {
  TaskKind task = TaskKind::Regress;
  DataSpec data;
  std::size_t depth = 4;
  Index width = 32;
  double leaky_slope = 0.0;
  double init_scale = 1.0;
  TrainConfig train;
  std::size_t probes = 1000;
  double rel_tol = 1e-3;
  double krr_ridge = 1e-3;
  double krr_length_scale = 0.0;
  TspMode tsp_mode = TspMode::Auto;
  std::string out = "out";
  std::uint64_t seed = 0;
};

/// Raw key = value settings with defaults; the single source of truth for
/// which keys exist.
class ConfigText {
 public:
  ConfigText() {
    values_ = {{"task", "regress"},
               {"data.kind", "lowrank"},
               {"data.path", ""},
               {"data.labels", ""},
               {"data.n", "200"},
               {"data.d_in", "10"},
               {"data.d_out", "10"},
               {"data.latent", "5"},
               {"data.rank", "2"},
               {"data.gen_width", "100"},
               {"data.classes", "4"},
               {"data.noise", "0"},
               {"data.seed", "0"},
               {"depth", "4"},
               {"width", "32"},
               {"leaky_slope", "0"},
               {"init_scale", "1"},
               {"lambda", "0"},
               {"lr", "1e-3"},
               {"steps", "1000"},
               {"beta1", "0.9"},
               {"beta2", "0.999"},
               {"adam_eps", "1e-8"},
               {"gd_steps", "0"},
               {"gd_lr", "1e-4"},
               {"batch", "0"},
               {"weight_decay", "decoupled"},
               {"probes", "1000"},
               {"rel_tol", "1e-3"},
               {"krr.ridge", "1e-3"},
               {"krr.length_scale", "0"},
               {"tsp.mode", "auto"},
               {"out", "out"},
               {"seed", "0"}};
  }

  void set(const std::string& key, const std::string& value) {
    auto it = values_.find(key);
    if (it == values_.end()) throw InvalidConfig("unknown config key '" + key + "'");
    it->second = value;
  }

  /// "key=value" as given on the command line.
  void set_assignment(const std::string& kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw InvalidConfig("expected key=value, got '" + kv + "'");
    set(io::trim(kv.substr(0, eq)), io::trim(kv.substr(eq + 1)));
  }

  /// Lines of "key = value"; '#' starts a comment.
  void merge_text(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      if (io::trim(line).empty()) continue;
      if (line.find('=') == std::string::npos) {
        throw InvalidConfig("config line " + std::to_string(lineno) + ": expected 'key = value'");
      }
      set_assignment(line);
    }
  }

  void merge_file(const fs::path& path) {
    std::string text;
    try {
      text = io::read_file(path);
    } catch (const FormatError&) {
      throw InvalidConfig("cannot read config file " + path.string());
    }
    merge_text(text);
  }

  const std::string& get(const std::string& key) const { return values_.at(key); }

  /// Sorted "key = value" lines; parses back to the same settings.
  std::string resolved() const {
    std::ostringstream out;
    for (const auto& [k, v] : values_) out << k << " = " << v << '\n';
    return out.str();
  }

 private:
  std::map<std::string, std::string> values_;
};

namespace detail {

inline double real(const ConfigText& c, const std::string& key) {
  return io::parse_double<InvalidConfig>(c.get(key), key.c_str());
}

inline long long integer(const ConfigText& c, const std::string& key, long long min) {
  const long long v = io::parse_int<InvalidConfig>(c.get(key), key.c_str());
  if (v < min) throw InvalidConfig(key + " must be >= " + std::to_string(min));
  return v;
}

inline std::uint64_t seed_value(const ConfigText& c, const std::string& key) {
  return static_cast<std::uint64_t>(integer(c, key, 0));
}

}  // namespace detail

/// Validates every field before any compute.
inline ExperimentConfig resolve(const ConfigText& c) {
  using detail::integer;
  using detail::real;
  ExperimentConfig e;
  const std::string& task = c.get("task");
  if (task == "regress") e.task = TaskKind::Regress;
  else if (task == "classify") e.task = TaskKind::Classify;
  else if (task == "autoencode") e.task = TaskKind::Autoencode;
  else if (task == "bound") e.task = TaskKind::Bound;
  else if (task == "krr") e.task = TaskKind::Krr;
  else if (task == "construct") e.task = TaskKind::Construct;
  else throw InvalidConfig("task must be regress|classify|autoencode|bound|krr|construct, got '" + task + "'");

  e.data.kind = c.get("data.kind");
  if (e.data.kind != "lowrank" && e.data.kind != "sshape" && e.data.kind != "curve1d" && e.data.kind != "csv" &&
      e.data.kind != "idx") {
    throw InvalidConfig("data.kind must be lowrank|sshape|curve1d|csv|idx, got '" + e.data.kind + "'");
  }
  e.data.path = c.get("data.path");
  e.data.labels_path = c.get("data.labels");
  if ((e.data.kind == "csv" || e.data.kind == "idx") && e.data.path.empty()) {
    throw InvalidConfig("data.kind=" + e.data.kind + " needs data.path");
  }
  e.data.n = integer(c, "data.n", 1);
  e.data.d_in = integer(c, "data.d_in", 1);
  e.data.d_out = integer(c, "data.d_out", 1);
  e.data.latent = integer(c, "data.latent", 1);
  e.data.rank = integer(c, "data.rank", 1);
  e.data.gen_width = integer(c, "data.gen_width", 1);
  e.data.classes = static_cast<int>(integer(c, "data.classes", 2));
  e.data.noise = real(c, "data.noise");
  if (!(e.data.noise >= 0.0)) throw InvalidConfig("data.noise must be >= 0");
  e.data.seed = detail::seed_value(c, "data.seed");
  if (e.data.kind == "lowrank" && !(e.data.rank <= e.data.latent && e.data.latent <= e.data.d_in)) {
    throw InvalidConfig("lowrank data needs data.rank <= data.latent <= data.d_in");
  }

  e.depth = static_cast<std::size_t>(integer(c, "depth", 1));
  e.width = integer(c, "width", 1);
  e.leaky_slope = real(c, "leaky_slope");
  if (!(e.leaky_slope > -1.0 && e.leaky_slope < 1.0)) throw InvalidConfig("leaky_slope must lie in (-1, 1)");
  e.init_scale = real(c, "init_scale");
  if (!(e.init_scale >= 0.0)) throw InvalidConfig("init_scale must be >= 0");

  // "0.05/L" names the ridge coefficient lambda/L of the loss, i.e. lambda = 0.05.
  std::string lam = c.get("lambda");
  if (lam.size() > 2 && lam.substr(lam.size() - 2) == "/L") lam.resize(lam.size() - 2);
  e.train.lambda = io::parse_double<InvalidConfig>(lam, "lambda");
  e.train.lr = real(c, "lr");
  e.train.steps = static_cast<std::size_t>(integer(c, "steps", 0));
  e.train.beta1 = real(c, "beta1");
  e.train.beta2 = real(c, "beta2");
  e.train.adam_eps = real(c, "adam_eps");
  e.train.gd_refine_steps = static_cast<std::size_t>(integer(c, "gd_steps", 0));
  e.train.gd_lr = real(c, "gd_lr");
  e.train.batch = static_cast<std::size_t>(integer(c, "batch", 0));
  const std::string& wd = c.get("weight_decay");
  if (wd == "decoupled") e.train.decay_mode = WeightDecay::Decoupled;
  else if (wd == "coupled") e.train.decay_mode = WeightDecay::Coupled;
  else throw InvalidConfig("weight_decay must be decoupled|coupled");
  e.seed = detail::seed_value(c, "seed");
  e.train.seed = e.seed;
  e.train.validate();

  e.probes = static_cast<std::size_t>(integer(c, "probes", 0));
  e.rel_tol = real(c, "rel_tol");
  if (!(e.rel_tol > 0.0 && e.rel_tol < 1.0)) throw InvalidConfig("rel_tol must lie in (0, 1)");
  e.krr_ridge = real(c, "krr.ridge");
  if (!(e.krr_ridge > 0.0)) throw InvalidConfig("krr.ridge must be > 0");
  e.krr_length_scale = real(c, "krr.length_scale");
  const std::string& mode = c.get("tsp.mode");
  if (mode == "auto") e.tsp_mode = TspMode::Auto;
  else if (mode == "exact") e.tsp_mode = TspMode::Exact;
  else if (mode == "heuristic") e.tsp_mode = TspMode::Heuristic;
  else throw InvalidConfig("tsp.mode must be auto|exact|heuristic");
  e.out = c.get("out");
  if (e.out.empty()) throw InvalidConfig("out must name a directory");
  return e;
}

/// Builds (or loads) the dataset described by s. Output noise, when set,
/// is Gaussian with standard deviation data.noise, seeded from data.seed.
inline Dataset make_dataset(const DataSpec& s) {
  Dataset d;
  if (s.kind == "lowrank") {
    d = synth_lowrank(s.d_in, s.d_out, s.latent, s.rank, s.n, s.seed, s.gen_width);
  } else if (s.kind == "sshape") {
    d = s_shape_classes(s.classes, std::max<Index>(1, s.n / s.classes), s.seed);
  } else if (s.kind == "curve1d") {
    d = curve1d_in_plane(s.n, s.seed);
  } else if (s.kind == "csv") {
    d = load_dataset_csv(s.path);
  } else {
    d = load_idx(s.path, s.labels_path);
  }
  if (s.noise > 0.0 && d.Y) {
    std::mt19937_64 rng(s.seed ^ 0xC0FFEEULL);
    std::normal_distribution<double> normal(0.0, s.noise);
    for (Index j = 0; j < d.Y->cols(); ++j)
      for (Index i = 0; i < d.Y->rows(); ++i) (*d.Y)(i, j) += normal(rng);
  }
  return d;
}

inline Targets task_targets(const ExperimentConfig& e, const Dataset& d) {
  if (e.task == TaskKind::Classify) {
    if (!d.labels) throw InvalidConfig("task=classify needs a labeled dataset");
    return *d.labels;
  }
  if (e.task == TaskKind::Autoencode) return Matrix(d.X);
  if (!d.Y) throw InvalidConfig("task=" + std::string(e.task == TaskKind::Regress ? "regress" : "krr") +
                                " needs regression targets");
  return *d.Y;
}

inline std::vector<Index> architecture(const ExperimentConfig& e, Index d_in, Index d_out) {
  std::vector<Index> w{d_in};
  for (std::size_t l = 1; l < e.depth; ++l) w.push_back(e.width);
  w.push_back(d_out);
  return w;
}

inline Index target_dim(const Targets& t) {
  if (const auto* y = std::get_if<Matrix>(&t)) return y->rows();
  const auto& labels = std::get<std::vector<int>>(t);
  return labels.empty() ? 1 : *std::max_element(labels.begin(), labels.end()) + 1;
}

inline double fit_error(const NetworkParams& p, const Matrix& x, const Targets& t) {
  if (const auto* y = std::get_if<Matrix>(&t)) return loss_mse_reg(p, x, *y, 0.0).data;
  return loss_cross_entropy(p, x, std::get<std::vector<int>>(t));
}

struct TrainOutcome {
  NetworkParams params;
  TrainHistory history;
  RankReport report;
  double fit_error = 0.0;
};

/// Training pipeline without file output; shared by train and sweep.
inline TrainOutcome run_training(const ExperimentConfig& e, const Dataset& d) {
  if (e.task != TaskKind::Regress && e.task != TaskKind::Classify && e.task != TaskKind::Autoencode) {
    throw InvalidConfig("train needs task regress|classify|autoencode");
  }
  const Targets targets = task_targets(e, d);
  const auto widths = architecture(e, d.input_dim(), target_dim(targets));
  const NetworkParams init = init_network(widths, e.leaky_slope, e.seed, e.init_scale);
  TrainResult r = train(init, d.X, targets, e.train);
  const auto probes = default_probes(bounding_box(d.X), d.X, e.probes, e.seed ^ 0x9B0BE5ULL);
  RankReport report = certify(r.params, probes, d.X, e.rel_tol);
  const double err = fit_error(r.params, d.X, targets);
  return TrainOutcome{std::move(r.params), std::move(r.history), std::move(report), err};
}

inline void write_config_echo(const ConfigText& c, const fs::path& out) {
  io::write_file_atomic(out / "config.txt", c.resolved());
}

inline void write_report(const RankReport& r, const fs::path& out) {
  io::write_file_atomic(out / "report.txt", report_kv(r));
  io::write_file_atomic(out / "report.csv", std::string(kReportCsvHeader) + "\n" + report_csv_row(r) + "\n");
}

inline void cmd_train(const ConfigText& c) {
  const ExperimentConfig e = resolve(c);
  const Dataset d = make_dataset(e.data);
  const fs::path out = e.out;
  write_config_echo(c, out);
  try {
    const TrainOutcome o = run_training(e, d);
    save_checkpoint(o.params, out / "model.ckpt");
    io::write_file_atomic(out / "history.csv", history_csv(o.history));
    write_report(o.report, out);
  } catch (const DivergenceError& err) {
    save_checkpoint(err.last_finite, out / "last_finite.ckpt");
    io::write_file_atomic(out / "history.csv", history_csv(err.history));
    throw;
  }
}

inline std::string spectra_csv(const std::vector<SingularSpectrum>& spectra, std::size_t first_layer) {
  std::ostringstream out;
  out << "layer,index,value\n";
  for (std::size_t l = 0; l < spectra.size(); ++l)
    for (std::size_t k = 0; k < spectra[l].values.size(); ++k)
      out << l + first_layer << ',' << k + 1 << ',' << io::fmt(spectra[l].values[k]) << '\n';
  return out.str();
}

inline std::string spectra_svg(const std::string& title, const std::vector<SingularSpectrum>& spectra,
                               std::size_t first_layer) {
  std::vector<svg::Series> series;
  for (std::size_t l = 0; l < spectra.size(); ++l) {
    svg::Series s{"layer " + std::to_string(l + first_layer), {}, {}};
    for (std::size_t k = 0; k < std::min<std::size_t>(10, spectra[l].values.size()); ++k) {
      s.x.push_back(static_cast<double>(k + 1));
      s.y.push_back(std::log10(std::max(spectra[l].values[k], 1e-300)));
    }
    series.push_back(std::move(s));
  }
  return svg::line_chart(title, "index", "log10 singular value", series);
}

/// Report plus per-layer activation spectra, nonlinearity impact and weight
/// spectra for a checkpoint on the configured dataset.
inline void cmd_analyze(const ConfigText& c, const fs::path& checkpoint) {
  const ExperimentConfig e = resolve(c);
  const NetworkParams p = load_checkpoint(checkpoint);
  const Dataset d = make_dataset(e.data);
  if (d.input_dim() != p.input_dim()) {
    throw ShapeError("checkpoint expects inputs of dimension " + std::to_string(p.input_dim()) +
                     " but the dataset has " + std::to_string(d.input_dim()));
  }
  const fs::path out = e.out;
  write_config_echo(c, out);
  const auto probes = default_probes(bounding_box(d.X), d.X, e.probes, e.seed ^ 0x9B0BE5ULL);
  write_report(certify(p, probes, d.X, e.rel_tol), out);
  std::vector<SingularSpectrum> weights;
  for (std::size_t l = 0; l < p.depth(); ++l) weights.push_back(singular_values(p.weight(l)));
  io::write_file_atomic(out / "weight_spectra.csv", spectra_csv(weights, 1));
  io::write_file_atomic(out / "weight_spectra.svg", spectra_svg("weight spectra", weights, 1));
  if (p.depth() >= 2) {
    const BottleneckProfile prof = bottleneck_profile(p, d.X);
    io::write_file_atomic(out / "spectra.csv", spectra_csv(prof.spectra, 1));
    io::write_file_atomic(out / "spectra.svg", spectra_svg("activation spectra", prof.spectra, 1));
    std::ostringstream impact;
    impact << "layer,impact,ratio,rank\n";
    svg::Series s{"impact", {}, {}};
    const auto ranks = prof.ranks(e.rel_tol);
    for (std::size_t l = 0; l < prof.nonlinearity_impact.size(); ++l) {
      impact << l + 1 << ',' << io::fmt(prof.nonlinearity_impact[l]) << ',' << io::fmt(prof.ratios[l]) << ','
             << ranks[l] << '\n';
      s.x.push_back(static_cast<double>(l + 1));
      s.y.push_back(prof.nonlinearity_impact[l]);
    }
    io::write_file_atomic(out / "impact.csv", impact.str());
    io::write_file_atomic(out / "impact.svg", svg::line_chart("nonlinearity impact", "layer", "relative change", {s}));
  }
}

inline std::vector<double> parse_list(const std::string& s) {
  std::vector<double> v;
  for (const auto& tok : io::split(s, ',')) v.push_back(io::parse_double<InvalidConfig>(tok, "list entry"));
  return v;
}

/// Serial composition g -> identity layers -> h, with g's range box given
/// as comma-separated lower and upper corners.
inline void cmd_construct(const ConfigText& c, const fs::path& g_path, const fs::path& h_path,
                          const std::string& lo, const std::string& hi) {
  const ExperimentConfig e = resolve(c);
  const NetworkParams g = load_checkpoint(g_path);
  const NetworkParams h = load_checkpoint(h_path);
  const auto lov = parse_list(lo), hiv = parse_list(hi);
  if (static_cast<Index>(lov.size()) != g.output_dim() || static_cast<Index>(hiv.size()) != g.output_dim()) {
    throw InvalidConfig("range corners must have g's output dimension " + std::to_string(g.output_dim()));
  }
  DomainBox box{Eigen::Map<const Vector>(lov.data(), static_cast<Index>(lov.size())),
                Eigen::Map<const Vector>(hiv.data(), static_cast<Index>(hiv.size()))};
  const SerialComposition comp = compose_serial(g, h, e.depth, box);
  const fs::path out = e.out;
  write_config_echo(c, out);
  save_checkpoint(comp.network, out / "composed.ckpt");
  std::ostringstream ledger;
  ledger << "g_norm " << io::fmt(comp.ledger.g_norm) << '\n'
         << "identity_cost " << io::fmt(comp.ledger.identity_cost) << '\n'
         << "h_norm " << io::fmt(comp.ledger.h_norm) << '\n'
         << "shift_cost " << io::fmt(comp.ledger.shift_cost) << '\n'
         << "total " << io::fmt(comp.ledger.total) << '\n'
         << "bottleneck_width " << comp.ledger.bottleneck_width << '\n'
         << "identity_layers " << comp.ledger.identity_layers << '\n';
  io::write_file_atomic(out / "ledger.txt", ledger.str());
}

inline std::string bound_kv(const TspBound& b) {
  std::ostringstream out;
  out << "tsp_length " << io::fmt(b.tsp_length) << '\n'
      << "diameter " << io::fmt(b.diameter) << '\n'
      << "L " << b.depth << '\n'
      << "norm_lower_bound " << io::fmt(b.norm_lower_bound) << '\n'
      << "mode " << to_string(b.mode) << '\n';
  return out.str();
}

inline void cmd_bound(const ConfigText& c) {
  const ExperimentConfig e = resolve(c);
  const Dataset d = make_dataset(e.data);
  const Matrix y = d.Y ? *d.Y : d.X;
  const TspBound b = tsp_lower_bound(d.X, y, e.depth, e.tsp_mode);
  const fs::path out = e.out;
  write_config_echo(c, out);
  io::write_file_atomic(out / "bound.txt", bound_kv(b));
}

inline void cmd_krr(const ConfigText& c) {
  const ExperimentConfig e = resolve(c);
  const Dataset d = make_dataset(e.data);
  if (!d.Y) throw InvalidConfig("krr needs regression targets");
  const KrrModel m = krr_fit(d.X, *d.Y, e.krr_ridge, e.krr_length_scale);
  const auto probes = default_probes(bounding_box(d.X), d.X, e.probes, e.seed ^ 0x9B0BE5ULL);
  const std::size_t rank = krr_rank(m, probes, e.rel_tol);
  const double mse = (krr_predict(m, d.X) - *d.Y).colwise().squaredNorm().mean();
  const fs::path out = e.out;
  write_config_echo(c, out);
  std::ostringstream kv;
  kv << "krr_rank " << rank << '\n'
     << "rank_tolerance " << io::fmt(e.rel_tol) << '\n'
     << "length_scale " << io::fmt(m.kernel.length_scale) << '\n'
     << "ridge " << io::fmt(m.ridge) << '\n'
     << "train_mse " << io::fmt(mse) << '\n'
     << "probe_count " << probes.size() << '\n';
  io::write_file_atomic(out / "krr.txt", kv.str());
}

inline void cmd_gen(const ConfigText& c) {
  const ExperimentConfig e = resolve(c);
  const Dataset d = make_dataset(e.data);
  const fs::path out = e.out;
  write_config_echo(c, out);
  save_dataset_csv(d, out / "dataset.csv");
}

enum class SweepAxis { Depth, Lambda, N };

inline SweepAxis parse_axis(const std::string& s) {
  if (s == "depth") return SweepAxis::Depth;
  if (s == "lambda") return SweepAxis::Lambda;
  if (s == "N" || s == "n") return SweepAxis::N;
  throw InvalidConfig("sweep axis must be depth|lambda|N, got '" + s + "'");
}

inline constexpr const char* kSweepHeader =
    "axis,value,seed,status,norm_over_L,jacobian_rank,bottleneck_ratio,fit_error,tsp_lower_bound";

/// One row per (value, seed). Cells run concurrently; a failing cell is
/// recorded with its error instead of aborting the sweep.
inline std::string run_sweep(const ConfigText& base, const std::string& axis_name, const std::vector<std::string>& values,
                             std::size_t seeds) {
  const SweepAxis axis = parse_axis(axis_name);
  if (values.empty()) throw InvalidConfig("sweep needs at least one value");
  if (seeds == 0) throw InvalidConfig("sweep needs at least one seed");
  const ExperimentConfig e0 = resolve(base);
  struct Cell {
    ConfigText cfg;
    std::string value;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (const auto& v : values) {
    for (std::size_t s = 0; s < seeds; ++s) {
      ConfigText c = base;
      c.set(axis == SweepAxis::Depth ? "depth" : axis == SweepAxis::Lambda ? "lambda" : "data.n", v);
      const std::uint64_t seed = e0.seed + s;
      c.set("seed", std::to_string(seed));
      c.set("data.seed", std::to_string(e0.data.seed + s));
      resolve(c);
      cells.push_back({std::move(c), v, seed});
    }
  }
  std::vector<std::string> rows(cells.size());
  parallel_for(cells.size(), [&](std::size_t i) {
    std::ostringstream row;
    row << axis_name << ',' << cells[i].value << ',' << cells[i].seed << ',';
    try {
      const ExperimentConfig e = resolve(cells[i].cfg);
      const Dataset d = make_dataset(e.data);
      const TrainOutcome o = run_training(e, d);
      std::string lb = "";
      if (d.Y || e.task == TaskKind::Autoencode) {
        lb = io::fmt(tsp_lower_bound(d.X, d.Y ? *d.Y : d.X, e.depth, e.tsp_mode).norm_lower_bound);
      }
      row << "ok," << io::fmt(o.report.norm_over_L) << ',' << o.report.jacobian_rank << ','
          << io::fmt(o.report.bottleneck_ratio) << ',' << io::fmt(o.fit_error) << ',' << lb;
    } catch (const Error& err) {
      std::string msg = err.what();
      std::replace(msg.begin(), msg.end(), ',', ';');
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      row << (dynamic_cast<const NumericError*>(&err) ? "numeric_error: " : "config_error: ") << msg << ",,,,,";
    }
    rows[i] = row.str();
  });
  std::string csv = std::string(kSweepHeader) + "\n";
  for (const auto& r : rows) csv += r + "\n";
  return csv;
}

inline void cmd_sweep(const ConfigText& c, const std::string& axis, const std::vector<std::string>& values,
                      std::size_t seeds) {
  const ExperimentConfig e = resolve(c);
  const std::string csv = run_sweep(c, axis, values, seeds);
  const fs::path out = e.out;
  write_config_echo(c, out);
  io::write_file_atomic(out / "sweep.csv", csv);
}

}  // namespace rankscope::cli
