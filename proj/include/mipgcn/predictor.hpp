#pragma once

#include "mipgcn/bnb.hpp"
#include "mipgcn/generators.hpp"
#include "mipgcn/mip.hpp"

#include <Eigen/Dense>

#include <string>
#include <utility>
#include <vector>

namespace mipgcn {

enum class ApplyMode { Approximate, Exact };

struct ApplyConfig {
  int phi = 0;
  double eta = 1.0;
  BnbConfig solver;
  ApplyMode mode = ApplyMode::Approximate;
};

void validate(const ApplyConfig& cfg);

/// Positions into z, most confident first, and the rounded values on them.
struct Selection {
  std::vector<int> positions;
  std::vector<int> values;
};

/// Sorted by min(z, 1 - z) ascending, ties by position; |S| = floor(eta n);
/// x_hat = 1 iff z >= 0.5.
Selection select_S(const Eigen::VectorXd& z, double eta);

/// Maps a selection over named predictions to instance variable indices.
/// Throws ParseError when a name is not a binary variable of inst.
LocalBranchingSet reference_set(const MipInstance& inst, const std::vector<std::string>& names,
                                const Eigen::VectorXd& z, double eta);

/// Adds the local branching cut and solves; bound_valid is false in the result.
SolveResult approximate_solve(const MipInstance& inst, const std::vector<std::string>& names, const Eigen::VectorXd& z,
                              const ApplyConfig& cfg);

/// Root branching on the same cut; the bound stays valid.
SolveResult exact_solve(const MipInstance& inst, const std::vector<std::string>& names, const Eigen::VectorXd& z,
                        const ApplyConfig& cfg);

struct ValidationCase {
  MipInstance instance;
  std::vector<std::string> names;
  Eigen::VectorXd z;
  double reference_objective = 0.0;
};

struct GridCell {
  int phi = 0;
  double eta = 0.0;
  double mean_primal_gap = 0.0;
};

struct GridResult {
  int phi = 0;
  double eta = 1.0;
  std::vector<GridCell> cells;
  long runs = 0;
};

/// Primal gap of a run against the reference; 100 when the run found nothing.
double run_gap(const SolveResult& r, double reference_objective);

/// Mean primal gap per grid pair; the smallest wins, ties to smaller phi then larger eta.
GridResult grid_search(const std::vector<ValidationCase>& validation, const std::vector<int>& phi_grid,
                       const std::vector<double>& eta_grid, const BnbConfig& solver, int jobs = 1);

/// Shipped (phi, eta) per problem type.
std::pair<int, double> default_phi_eta(ProblemType p);

inline const std::vector<int> kPhiGrid = {0, 5, 10, 15, 20};
inline const std::vector<double> kEtaGrid = {0.8, 0.9, 0.95, 0.99, 1.0};

std::string results_csv_header();
std::string results_csv_row(const std::string& instance, const std::string& mode, int phi, double eta,
                            const SolveResult& r);

}  // namespace mipgcn
