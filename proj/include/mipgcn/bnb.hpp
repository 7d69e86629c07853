#pragma once

#include "mipgcn/mip.hpp"
#include "mipgcn/simplex.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace mipgcn {

enum class SolveMode { Optimize, FirstFeasible };
enum class SolveStatus { Optimal, Feasible, Infeasible, LimitReached, Unbounded };

const char* to_string(SolveStatus s);

struct BnbConfig {
  double time_limit_s = 60.0;
  long node_limit = 10'000'000;
  double gap_limit = 1e-9;
  SolveMode mode = SolveMode::Optimize;
  std::uint64_t seed = 0;
  /// Optional point used to park nonbasic columns of the root LP; empty when unused.
  std::vector<double> start_hint;
};

struct SolveResult {
  SolveStatus status = SolveStatus::LimitReached;
  std::optional<Solution> incumbent;
  /// Proven bound in the instance's original sense (an upper bound for maximization).
  double lower_bound = -kInf;
  long nodes = 0;
  double wall_time_s = 0.0;
  /// False when a restriction (local-branching cut) was imposed, so the bound
  /// says nothing about the unrestricted instance.
  bool bound_valid = true;
  /// Global dual bound after every processed node, minimization sense.
  std::vector<double> bound_history;

  bool has_incumbent() const { return incumbent.has_value(); }
};

struct RootInfo {
  LpSolution lp;
  std::vector<int> up_locks;
  std::vector<int> down_locks;
  /// (up, down); zero at the root where no branching history exists.
  std::vector<std::pair<double, double>> pseudocosts;
  /// Canonical (minimize) instance after presolve; the LP and locks refer to it.
  MipInstance presolved;
  /// presolved variable / row index -> original index.
  std::vector<int> var_origin;
  std::vector<int> row_origin;
  bool negated = false;
};

/// Binary indices S with reference values x_hat (0/1), aligned by position.
struct LocalBranchingSet {
  std::vector<int> indices;
  std::vector<int> values;
};

SolveResult solve(const MipInstance& inst, const BnbConfig& cfg);

/// Adds sum_{S, x_hat=0} x_j + sum_{S, x_hat=1} (1 - x_j) <= phi as a ranged row.
MipInstance apply_local_branching_cut(const MipInstance& inst, const LocalBranchingSet& ref, int phi);

/// Splits the root into  Delta <= phi  and  Delta >= phi + 1  and solves both children.
SolveResult root_branch_solve(const MipInstance& inst, const LocalBranchingSet& ref, int phi,
                              const BnbConfig& cfg);

/// Removes fixed variables and rows left without coefficients. Returns nullopt
/// if an emptied row is violated.
struct PresolveResult {
  MipInstance instance;
  std::vector<int> var_origin;
  std::vector<int> row_origin;
};
std::optional<PresolveResult> presolve(const MipInstance& canonical);

/// Throws std::runtime_error when presolve or the root LP proves infeasibility.
RootInfo collect_root_info(const MipInstance& inst);

}  // namespace mipgcn
