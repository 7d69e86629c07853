#pragma once

#include <Eigen/Dense>

#include <utility>
#include <vector>

namespace mipgcn {

/// LU-style factorization of a simplex basis. Column and row singletons are
/// peeled off into triangular blocks; only the remaining nucleus is factored
/// densely. Bases that are mostly slack columns end up with a tiny nucleus.
class BasisFactor {
 public:
  using Column = std::vector<std::pair<int, double>>;

  /// cols[k] holds the (row, value) entries of basis column k. Returns false
  /// when the matrix is (numerically) singular.
  bool factor(int m, std::vector<Column> cols);

  /// Solves B x = b. b is indexed by row, the result by basis column.
  Eigen::VectorXd ftran(const Eigen::VectorXd& b) const;
  /// Solves B^T y = c. c is indexed by basis column, the result by row.
  Eigen::VectorXd btran(const Eigen::VectorXd& c) const;

  int nucleus_size() const { return static_cast<int>(nuc_cols_.size()); }

 private:
  struct Pivot {
    int row, col;
    double value;
  };

  int m_ = 0;
  std::vector<Column> cols_;
  std::vector<Pivot> col_singletons_;  // upper triangular block, discovery order
  std::vector<Pivot> row_singletons_;  // lower triangular block, discovery order
  std::vector<int> nuc_rows_, nuc_cols_;
  std::vector<signed char> row_kind_;  // 0 column-singleton block, 1 nucleus, 2 row-singleton block
  Eigen::PartialPivLU<Eigen::MatrixXd> nucleus_;
};

}  // namespace mipgcn
