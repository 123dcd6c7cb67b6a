#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rankscope/errors.hpp"
#include "rankscope/linalg.hpp"
#include "rankscope/network.hpp"

namespace rankscope {

struct DatasetMeta {
  std::optional<Index> latent_dim;
  std::optional<Index> true_rank;
  std::optional<std::uint64_t> seed;
  std::optional<DomainBox> domain_box;
  std::string generator;
};

/// Samples are columns: X is d_in x N, Y is d_out x N. Classification data
/// carries 0-based labels instead of (or in addition to) Y.
struct Dataset {
  Matrix X;
  std::optional<Matrix> Y;
  std::optional<std::vector<int>> labels;
  /// Latent coordinates each sample was generated from, when known.
  std::optional<Matrix> latent;
  DatasetMeta meta;

  Index size() const { return X.cols(); }
  Index input_dim() const { return X.rows(); }
  Index output_dim() const { return Y ? Y->rows() : 0; }
  bool labeled() const { return labels.has_value(); }
  int class_count() const {
    int m = 0;
    if (labels)
      for (int c : *labels) m = std::max(m, c + 1);
    return m;
  }

  void validate() const {
    if (X.cols() < 1 || X.rows() < 1) throw DimError("dataset has no samples");
    if (Y && Y->cols() != X.cols()) throw DimError("X and Y column counts differ");
    if (labels && static_cast<Index>(labels->size()) != X.cols()) throw DimError("label count differs from X");
    if (!Y && !labels) throw DimError("dataset has neither targets nor labels");
    if (meta.true_rank && Y && *meta.true_rank > std::min(X.rows(), Y->rows())) {
      throw DimError("true rank exceeds min(d_in, d_out)");
    }
  }
};

/// Bounding box of the columns of m.
inline DomainBox bounding_box(const Matrix& m) {
  return DomainBox{m.rowwise().minCoeff(), m.rowwise().maxCoeff()};
}

}  // namespace rankscope
