// rankscope: train, analyze and certify low-rank structure in deep ReLU nets.
//
// Exit codes: 0 success, 2 configuration/input error, 3 numeric failure.

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rankscope/experiment.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

}  // namespace

int main(int argc, char** argv) {
  using namespace rankscope;
  CLI::App app{"rankscope: low-rank bias diagnostics for deep ReLU networks"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "key = value config file");
    sub->add_option("-s,--set", overrides, "override a config key (key=value), repeatable");
    sub->add_option("-o,--out", out_dir, "output directory (config key 'out')");
  };

  auto* train = app.add_subcommand("train", "train a network and write checkpoint, history and rank report");
  add_common(train);

  std::string checkpoint;
  auto* analyze = app.add_subcommand("analyze", "spectra, nonlinearity impact and rank report for a checkpoint");
  add_common(analyze);
  analyze->add_option("checkpoint", checkpoint, "checkpoint file")->required();

  std::string g_path, h_path, lo, hi;
  auto* construct = app.add_subcommand("construct", "compose g and h through identity layers of total depth L");
  add_common(construct);
  construct->set_help_flag("--help", "print this help message and exit");  // frees -h for --h
  construct->add_option("--g", g_path, "checkpoint of the inner network g")->required();
  construct->add_option("--h", h_path, "checkpoint of the outer network h")->required();
  construct->add_option("--lo", lo, "lower corner of g's range, comma separated")->required();
  construct->add_option("--hi", hi, "upper corner of g's range, comma separated")->required();

  auto* bound = app.add_subcommand("bound", "TSP lower bound on the parameter norm of any interpolating network");
  add_common(bound);

  auto* krr = app.add_subcommand("krr", "kernel ridge regression baseline and its Jacobian rank");
  add_common(krr);

  auto* gen = app.add_subcommand("gen", "write the configured dataset as CSV");
  add_common(gen);

  std::string axis;
  std::vector<std::string> values;
  std::size_t seeds = 1;
  auto* sweep = app.add_subcommand("sweep", "train over a grid of depth, lambda or N values and aggregate");
  add_common(sweep);
  sweep->add_option("--axis", axis, "depth | lambda | N")->required();
  sweep->add_option("--values", values, "values along the axis")->required()->delimiter(',');
  sweep->add_option("--seeds", seeds, "seeds per value");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    cli::ConfigText cfg;
    if (!config_path.empty()) cfg.merge_file(config_path);
    for (const auto& kv : overrides) cfg.set_assignment(kv);
    if (!out_dir.empty()) cfg.set("out", out_dir);
    if (bound->parsed()) cfg.set("task", "bound");
    if (krr->parsed()) cfg.set("task", "krr");
    if (construct->parsed()) cfg.set("task", "construct");

    if (train->parsed()) cli::cmd_train(cfg);
    else if (analyze->parsed()) cli::cmd_analyze(cfg, checkpoint);
    else if (construct->parsed()) cli::cmd_construct(cfg, g_path, h_path, lo, hi);
    else if (bound->parsed()) cli::cmd_bound(cfg);
    else if (krr->parsed()) cli::cmd_krr(cfg);
    else if (gen->parsed()) cli::cmd_gen(cfg);
    else if (sweep->parsed()) cli::cmd_sweep(cfg, axis, values, seeds);
    std::cout << "wrote " << cfg.get("out") << '\n';
  } catch (const UsageError& e) {
    std::cerr << "rankscope: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericError& e) {
    std::cerr << "rankscope: numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "rankscope: " << e.what() << '\n';
    return kExitConfig;
  }
  return 0;
}
