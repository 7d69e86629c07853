#include "mipgcn/basis_factor.hpp"

#include <cmath>

namespace mipgcn {

namespace {
constexpr double kSingularTol = 1e-9;
}

bool BasisFactor::factor(int m, std::vector<Column> cols) {
  m_ = m;
  cols_ = std::move(cols);
  col_singletons_.clear();
  row_singletons_.clear();
  nuc_rows_.clear();
  nuc_cols_.clear();
  row_kind_.assign(m, 1);

  std::vector<std::vector<int>> row_cols(m);
  std::vector<int> col_count(m, 0), row_count(m, 0);
  for (int c = 0; c < m; ++c)
    for (const auto& [r, v] : cols_[c]) {
      row_cols[r].push_back(c);
      ++col_count[c];
      ++row_count[r];
    }
  std::vector<char> row_active(m, 1), col_active(m, 1);

  auto pivot_entry = [&](int c, int r) {
    for (const auto& [i, v] : cols_[c])
      if (i == r) return v;
    return 0.0;
  };

  // Column singletons.
  std::vector<int> stack;
  for (int c = 0; c < m; ++c)
    if (col_count[c] == 1) stack.push_back(c);
  while (!stack.empty()) {
    const int c = stack.back();
    stack.pop_back();
    if (!col_active[c] || col_count[c] != 1) continue;
    int r = -1;
    for (const auto& [i, v] : cols_[c])
      if (row_active[i]) r = i;
    const double v = pivot_entry(c, r);
    if (std::abs(v) < kSingularTol) continue;
    col_singletons_.push_back({r, c, v});
    row_kind_[r] = 0;
    row_active[r] = 0;
    col_active[c] = 0;
    for (int c2 : row_cols[r])
      if (col_active[c2] && --col_count[c2] == 1) stack.push_back(c2);
    for (const auto& [i, w] : cols_[c]) --row_count[i];
  }

  // Row singletons among what is left.
  for (int r = 0; r < m; ++r)
    if (row_active[r] && row_count[r] == 1) stack.push_back(r);
  while (!stack.empty()) {
    const int r = stack.back();
    stack.pop_back();
    if (!row_active[r] || row_count[r] != 1) continue;
    int c = -1;
    for (int c2 : row_cols[r])
      if (col_active[c2]) c = c2;
    const double v = pivot_entry(c, r);
    if (std::abs(v) < kSingularTol) continue;
    row_singletons_.push_back({r, c, v});
    row_kind_[r] = 2;
    row_active[r] = 0;
    col_active[c] = 0;
    for (const auto& [i, w] : cols_[c])
      if (row_active[i] && --row_count[i] == 1) stack.push_back(i);
  }

  std::vector<int> local(m, -1);
  for (int r = 0; r < m; ++r)
    if (row_active[r]) {
      local[r] = static_cast<int>(nuc_rows_.size());
      nuc_rows_.push_back(r);
    }
  for (int c = 0; c < m; ++c)
    if (col_active[c]) nuc_cols_.push_back(c);
  if (nuc_rows_.size() != nuc_cols_.size()) return false;
  const int k = static_cast<int>(nuc_cols_.size());
  if (k > 0) {
    Eigen::MatrixXd N = Eigen::MatrixXd::Zero(k, k);
    for (int j = 0; j < k; ++j)
      for (const auto& [i, v] : cols_[nuc_cols_[j]])
        if (local[i] >= 0) N(local[i], j) = v;
    nucleus_.compute(N);
    const Eigen::VectorXd d = nucleus_.matrixLU().diagonal().cwiseAbs();
    if (!(d.minCoeff() > 1e-11 * std::max(1.0, d.maxCoeff()))) return false;
  }
  return true;
}

Eigen::VectorXd BasisFactor::ftran(const Eigen::VectorXd& b) const {
  Eigen::VectorXd work = b;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(m_);
  for (const auto& p : row_singletons_) {
    const double xc = work[p.row] / p.value;
    x[p.col] = xc;
    if (xc == 0.0) continue;
    for (const auto& [i, a] : cols_[p.col])
      if (i != p.row) work[i] -= a * xc;
  }
  if (!nuc_cols_.empty()) {
    const int k = static_cast<int>(nuc_cols_.size());
    Eigen::VectorXd rhs(k);
    for (int t = 0; t < k; ++t) rhs[t] = work[nuc_rows_[t]];
    Eigen::VectorXd sol = nucleus_.permutationP() * rhs;
    const auto& lu = nucleus_.matrixLU();
    lu.triangularView<Eigen::UnitLower>().solveInPlace(sol);
    lu.triangularView<Eigen::Upper>().solveInPlace(sol);
    for (int t = 0; t < k; ++t) {
      const int c = nuc_cols_[t];
      x[c] = sol[t];
      if (sol[t] == 0.0) continue;
      for (const auto& [i, a] : cols_[c])
        if (row_kind_[i] == 0) work[i] -= a * sol[t];
    }
  }
  for (auto it = col_singletons_.rbegin(); it != col_singletons_.rend(); ++it) {
    const double xc = work[it->row] / it->value;
    x[it->col] = xc;
    if (xc == 0.0) continue;
    for (const auto& [i, a] : cols_[it->col])
      if (i != it->row) work[i] -= a * xc;
  }
  return x;
}

Eigen::VectorXd BasisFactor::btran(const Eigen::VectorXd& c) const {
  Eigen::VectorXd y = Eigen::VectorXd::Zero(m_);
  for (const auto& p : col_singletons_) {
    double s = c[p.col];
    for (const auto& [i, a] : cols_[p.col])
      if (i != p.row) s -= a * y[i];
    y[p.row] = s / p.value;
  }
  if (!nuc_cols_.empty()) {
    const int k = static_cast<int>(nuc_cols_.size());
    Eigen::VectorXd rhs(k);
    for (int t = 0; t < k; ++t) {
      const int col = nuc_cols_[t];
      double s = c[col];
      for (const auto& [i, a] : cols_[col])
        if (row_kind_[i] == 0) s -= a * y[i];
      rhs[t] = s;
    }
    // P N = L U, so N^T y = r becomes U^T z = r, L^T w = z, y = P^T w.
    const auto& lu = nucleus_.matrixLU();
    lu.triangularView<Eigen::Upper>().transpose().solveInPlace(rhs);
    lu.triangularView<Eigen::UnitLower>().transpose().solveInPlace(rhs);
    const Eigen::VectorXd sol = nucleus_.permutationP().transpose() * rhs;
    for (int t = 0; t < k; ++t) y[nuc_rows_[t]] = sol[t];
  }
  for (auto it = row_singletons_.rbegin(); it != row_singletons_.rend(); ++it) {
    double s = c[it->col];
    for (const auto& [i, a] : cols_[it->col])
      if (i != it->row) s -= a * y[i];
    y[it->row] = s / it->value;
  }
  return y;
}

}  // namespace mipgcn
