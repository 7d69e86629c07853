#pragma once

#include "mipgcn/basis_factor.hpp"
#include "mipgcn/mip.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <map>
#include <optional>
#include <utility>
#include <vector>

namespace mipgcn {

enum class LpStatus { Optimal, Infeasible, Unbounded, NumericalFailure };
enum class BasisStatus { Basic, AtLower, AtUpper };

const char* to_string(LpStatus s);

struct LpSolution {
  LpStatus status = LpStatus::NumericalFailure;
  Eigen::VectorXd x;
  double objective = 0.0;
  /// One multiplier per row; nonnegative when the row's lhs is active.
  Eigen::VectorXd duals;
  Eigen::VectorXd reduced_costs;
  std::vector<BasisStatus> var_basis;
  std::vector<BasisStatus> row_basis;
  int iterations = 0;
};

/// Bound overrides keyed by variable index: (lb, ub).
using BoundOverrides = std::map<int, std::pair<double, double>>;

/// Column-major LP  min c.x  s.t.  row_lb <= A x <= row_ub,  col_lb <= x <= col_ub.
struct LpModel {
  Eigen::SparseMatrix<double> A;
  Eigen::VectorXd cost;
  Eigen::VectorXd col_lb, col_ub;
  Eigen::VectorXd row_lb, row_ub;

  int rows() const { return static_cast<int>(A.rows()); }
  int cols() const { return static_cast<int>(A.cols()); }
};

/// Builds the relaxation of a minimization instance (integrality dropped).
LpModel build_lp_model(const MipInstance& inst, const BoundOverrides& overrides = {},
                       const std::vector<Constraint>& extra_rows = {});

/// Bounded-variable two-phase primal simplex over the computational form
/// [A  -I] (x, s) = 0 with slack bounds row_lb <= s <= row_ub.
///
/// When the starting basis is primal infeasible but can be made dual feasible
/// (the usual case after a branching bound change) a bounded dual simplex runs
/// first. Otherwise phase 1 minimizes the sum of bound violations of the basic
/// variables (composite phase), so it can start from any basis. The basis is kept as a BasisFactor
/// followed by a product-form eta file, refactored every
/// `kRefactorPeriod` pivots.
class LpSolver {
 public:
  static constexpr int kRefactorPeriod = 100;
  static constexpr double kPivotTol = 1e-9;
  static constexpr double kPrimalTol = 1e-7;
  static constexpr double kDualTol = 1e-7;

  struct Basis {
    std::vector<int> head;
    std::vector<signed char> state;
  };

  explicit LpSolver(LpModel model);

  int rows() const { return m_; }
  int cols() const { return n_; }

  void set_col_bounds(int j, double lb, double ub);
  double col_lb(int j) const { return lb_[j]; }
  double col_ub(int j) const { return ub_[j]; }

  /// Slack basis with structural columns parked at the bound closest to `hint`.
  void reset_basis(const Eigen::VectorXd* hint = nullptr);
  Basis basis() const { return {head_, state_}; }
  void set_basis(const Basis& b);

  LpStatus solve();

  LpStatus status() const { return status_; }
  Eigen::VectorXd primal() const { return x_.head(n_); }
  double objective() const;
  LpSolution solution() const;
  int iterations() const { return total_iters_; }

 private:
  enum State : signed char { kBasic = 0, kLower = 1, kUpper = 2, kFree = 3 };

  enum class DualResult { Optimal, Infeasible, Stalled };

  void place_nonbasic(int j, const Eigen::VectorXd* hint);
  bool make_dual_feasible();
  DualResult dual_loop();
  LpStatus primal_loop();
  bool refactor();
  void recompute_basic_values();
  Eigen::VectorXd ftran(Eigen::VectorXd v) const;
  Eigen::VectorXd btran(Eigen::VectorXd v) const;
  Eigen::VectorXd column_ftran(int j) const;
  double dot_column(const Eigen::VectorXd& y, int j) const;
  double max_infeasibility() const;
  Eigen::VectorXd compute_duals(bool phase_one) const;

  int n_ = 0, m_ = 0;
  Eigen::SparseMatrix<double> A_;
  Eigen::VectorXd cost_, lb_, ub_, x_;
  std::vector<int> head_, pos_;
  std::vector<signed char> state_;
  struct Eta {
    int row;
    double pivot;
    std::vector<std::pair<int, double>> entries;  // off-pivot entries of the entering column
  };
  BasisFactor factor_;
  std::vector<Eta> etas_;
  std::vector<double> dse_;  // dual steepest-edge weights by basis position
  bool factor_valid_ = false;
  int since_refactor_ = 0;
  int total_iters_ = 0;
  LpStatus status_ = LpStatus::NumericalFailure;
};

LpSolution solve_lp(const MipInstance& inst, const BoundOverrides& overrides = {},
                    const std::vector<Constraint>& extra_rows = {});

}  // namespace mipgcn
