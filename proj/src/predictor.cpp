#include "mipgcn/predictor.hpp"

#include "mipgcn/metrics.hpp"
#include "mipgcn/parallel.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mipgcn {

void validate(const ApplyConfig& cfg) {
  if (cfg.phi < 0) throw std::invalid_argument("phi must be >= 0");
  if (!(cfg.eta > 0.0 && cfg.eta <= 1.0)) throw std::invalid_argument("eta must lie in (0, 1]");
}

Selection select_S(const Eigen::VectorXd& z, double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) throw std::invalid_argument("eta must lie in (0, 1]");
  const auto n = static_cast<int>(z.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto key = [&](int i) { return std::min(z[i], 1.0 - z[i]); };
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return key(a) < key(b); });
  const int size = static_cast<int>(std::floor(eta * n + 1e-9));
  Selection s;
  for (int k = 0; k < size; ++k) {
    s.positions.push_back(order[k]);
    s.values.push_back(z[order[k]] >= 0.5 ? 1 : 0);
  }
  return s;
}

LocalBranchingSet reference_set(const MipInstance& inst, const std::vector<std::string>& names,
                                const Eigen::VectorXd& z, double eta) {
  if (static_cast<Eigen::Index>(names.size()) != z.size()) throw std::invalid_argument("one prediction per name expected");
  const auto sel = select_S(z, eta);
  LocalBranchingSet ref;
  for (std::size_t k = 0; k < sel.positions.size(); ++k) {
    const auto& name = names[sel.positions[k]];
    const int j = inst.find_variable(name);
    if (j < 0 || inst.variables[j].vtype != VarType::Binary)
      throw ParseError("prediction for '" + name + "', which is not a binary variable of " + inst.name);
    ref.indices.push_back(j);
    ref.values.push_back(sel.values[k]);
  }
  return ref;
}

SolveResult approximate_solve(const MipInstance& inst, const std::vector<std::string>& names, const Eigen::VectorXd& z,
                              const ApplyConfig& cfg) {
  validate(cfg);
  auto res = solve(apply_local_branching_cut(inst, reference_set(inst, names, z, cfg.eta), cfg.phi), cfg.solver);
  res.bound_valid = false;
  return res;
}

SolveResult exact_solve(const MipInstance& inst, const std::vector<std::string>& names, const Eigen::VectorXd& z,
                        const ApplyConfig& cfg) {
  validate(cfg);
  return root_branch_solve(inst, reference_set(inst, names, z, cfg.eta), cfg.phi, cfg.solver);
}

double run_gap(const SolveResult& r, double reference_objective) {
  if (!r.has_incumbent()) return 100.0;
  return primal_gap(r.incumbent->objective, reference_objective);
}

GridResult grid_search(const std::vector<ValidationCase>& validation, const std::vector<int>& phi_grid,
                       const std::vector<double>& eta_grid, const BnbConfig& solver, int jobs) {
  if (validation.empty() || phi_grid.empty() || eta_grid.empty()) throw std::invalid_argument("grid search needs data and grids");
  std::vector<std::pair<int, double>> pairs;
  for (int phi : phi_grid)
    for (double eta : eta_grid) pairs.emplace_back(phi, eta);
  const int nv = static_cast<int>(validation.size());
  const int cells = static_cast<int>(pairs.size()) * nv;
  std::vector<double> gaps(cells);
  parallel_for(cells, jobs, [&](int k) {
    const auto& [phi, eta] = pairs[k / nv];
    const auto& c = validation[k % nv];
    ApplyConfig cfg{phi, eta, solver, ApplyMode::Approximate};
    gaps[k] = run_gap(approximate_solve(c.instance, c.names, c.z, cfg), c.reference_objective);
  });

  GridResult out;
  out.runs = cells;
  double best = kInf;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    double sum = 0.0;
    for (int i = 0; i < nv; ++i) sum += gaps[p * nv + i];
    const GridCell cell{pairs[p].first, pairs[p].second, sum / nv};
    out.cells.push_back(cell);
    const bool better = cell.mean_primal_gap < best ||
                        (cell.mean_primal_gap == best &&
                         (cell.phi < out.phi || (cell.phi == out.phi && cell.eta > out.eta)));
    if (better) {
      best = cell.mean_primal_gap;
      out.phi = cell.phi;
      out.eta = cell.eta;
    }
  }
  return out;
}

std::pair<int, double> default_phi_eta(ProblemType p) {
  switch (p) {
    case ProblemType::FCNF: return {0, 0.80};
    case ProblemType::CFL: return {0, 0.95};
    case ProblemType::GA: return {5, 0.99};
    case ProblemType::MIS: return {10, 0.90};
    case ProblemType::MK: return {10, 0.80};
    case ProblemType::SC: return {0, 0.90};
    case ProblemType::TSP: return {0, 0.90};
    case ProblemType::VRP: return {5, 0.95};
  }
  return {0, 1.0};
}

std::string results_csv_header() { return "instance,mode,phi,eta,status,objective,lower_bound,nodes,wall_time_s\n"; }

std::string results_csv_row(const std::string& instance, const std::string& mode, int phi, double eta,
                            const SolveResult& r) {
  const std::string obj = r.has_incumbent() ? fmt::format("{:.17g}", r.incumbent->objective) : "";
  return fmt::format("{},{},{},{:.17g},{},{},{:.17g},{},{:.17g}\n", instance, mode, phi, eta, to_string(r.status), obj,
                     r.lower_bound, r.nodes, r.wall_time_s);
}

}  // namespace mipgcn
