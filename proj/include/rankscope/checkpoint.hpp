#pragma once

// "rankscope-net v1" checkpoints: a line-oriented text document.
//
//   rankscope-net v1
//   leaky_slope <a>
//   widths <n_0> <n_1> ... <n_L>
//   layer <l>            (l = 1..L)
//   <n_l rows of n_{l-1} numbers>   weight matrix, row by row
//   <n_l numbers>                   bias
//   end
//
// Numbers carry 17 significant digits so doubles round-trip exactly.

#include <filesystem>
#include <sstream>
#include <string>

#include "rankscope/io.hpp"
#include "rankscope/network.hpp"

namespace rankscope {

inline constexpr const char* kCheckpointMagic = "rankscope-net v1";

inline std::string to_checkpoint(const NetworkParams& p) {
  std::ostringstream out;
  out << kCheckpointMagic << '\n';
  out << "leaky_slope " << io::fmt(p.leaky_slope()) << '\n';
  out << "widths";
  for (Index n : p.widths()) out << ' ' << n;
  out << '\n';
  for (std::size_t l = 0; l < p.depth(); ++l) {
    out << "layer " << l + 1 << '\n';
    const Matrix& w = p.weight(l);
    for (Index i = 0; i < w.rows(); ++i) {
      for (Index j = 0; j < w.cols(); ++j) out << (j ? " " : "") << io::fmt(w(i, j));
      out << '\n';
    }
    const Vector& b = p.bias(l);
    for (Index i = 0; i < b.size(); ++i) out << (i ? " " : "") << io::fmt(b(i));
    out << '\n';
  }
  out << "end\n";
  return out.str();
}

inline NetworkParams from_checkpoint(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  auto next = [&](const char* what) {
    if (!std::getline(in, line)) throw CheckpointError(std::string("checkpoint truncated before ") + what);
    return io::split_ws(line);
  };
  auto numbers = [&](Index expected, const char* what) {
    const auto tok = next(what);
    if (static_cast<Index>(tok.size()) != expected) {
      throw CheckpointError(std::string("checkpoint ") + what + " row has " + std::to_string(tok.size()) +
                            " values, expected " + std::to_string(expected));
    }
    std::vector<double> v;
    for (const auto& t : tok) v.push_back(io::parse_double<CheckpointError>(t, what));
    return v;
  };

  if (!std::getline(in, line) || io::trim(line) != kCheckpointMagic) {
    throw CheckpointError("unsupported checkpoint header: '" + io::trim(line) + "'");
  }
  auto tok = next("leaky_slope");
  if (tok.size() != 2 || tok[0] != "leaky_slope") throw CheckpointError("expected 'leaky_slope <a>'");
  const double a = io::parse_double<CheckpointError>(tok[1], "leaky_slope");
  tok = next("widths");
  if (tok.size() < 3 || tok[0] != "widths") throw CheckpointError("expected 'widths n0 ... nL' with L >= 1");
  std::vector<Index> widths;
  for (std::size_t i = 1; i < tok.size(); ++i) {
    const auto n = io::parse_int<CheckpointError>(tok[i], "width");
    if (n < 1) throw CheckpointError("widths must be positive");
    widths.push_back(static_cast<Index>(n));
  }
  Tensors t;
  for (std::size_t l = 1; l < widths.size(); ++l) {
    tok = next("layer header");
    if (tok.size() != 2 || tok[0] != "layer" || io::parse_int<CheckpointError>(tok[1]) != static_cast<long long>(l)) {
      throw CheckpointError("expected 'layer " + std::to_string(l) + "'");
    }
    Matrix w(widths[l], widths[l - 1]);
    for (Index i = 0; i < w.rows(); ++i) {
      const auto row = numbers(w.cols(), "weight");
      for (Index j = 0; j < w.cols(); ++j) w(i, j) = row[static_cast<std::size_t>(j)];
    }
    const auto b = numbers(widths[l], "bias");
    t.weights.push_back(std::move(w));
    t.biases.push_back(Eigen::Map<const Vector>(b.data(), static_cast<Index>(b.size())));
  }
  tok = next("end");
  if (tok.size() != 1 || tok[0] != "end") throw CheckpointError("expected 'end'");
  try {
    return NetworkParams(std::move(t), a);
  } catch (const InvalidArchitecture& e) {
    throw CheckpointError(std::string("checkpoint describes an invalid network: ") + e.what());
  }
}

inline void save_checkpoint(const NetworkParams& p, const std::filesystem::path& path) {
  io::write_file_atomic(path, to_checkpoint(p));
}

inline NetworkParams load_checkpoint(const std::filesystem::path& path) {
  try {
    return from_checkpoint(io::read_file(path));
  } catch (const FormatError& e) {
    throw CheckpointError(e.what());
  }
}

}  // namespace rankscope
