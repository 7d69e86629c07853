#include "mipgcn/bnb.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <map>
#include <set>
#include <stdexcept>

namespace mipgcn {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Feasible: return "feasible";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::LimitReached: return "limit_reached";
    case SolveStatus::Unbounded: return "unbounded";
  }
  return "?";
}

namespace {

using Clock = std::chrono::steady_clock;

struct Locks {
  std::vector<int> up, down;
};

Locks compute_locks(const MipInstance& inst) {
  Locks l;
  l.up.assign(inst.num_vars(), 0);
  l.down.assign(inst.num_vars(), 0);
  for (const auto& row : inst.constraints) {
    const bool has_rhs = std::isfinite(row.rhs), has_lhs = std::isfinite(row.lhs);
    for (const auto& t : row.coeffs) {
      if (t.coef > 0) {
        l.up[t.var] += has_rhs;
        l.down[t.var] += has_lhs;
      } else if (t.coef < 0) {
        l.up[t.var] += has_lhs;
        l.down[t.var] += has_rhs;
      }
    }
  }
  return l;
}

struct BoundChange {
  int var;
  double lb, ub;
};

struct Node {
  long id = 0;
  double bound = -kInf;
  std::vector<BoundChange> changes;
  std::shared_ptr<const LpSolver::Basis> basis;
};

// Open nodes, reachable both by best bound and by recency (the deepest, most
// recently created node).
class OpenNodes {
 public:
  bool empty() const { return nodes_.empty(); }
  void push(Node n) {
    by_bound_.insert({n.bound, n.id});
    const long id = n.id;
    nodes_.emplace(id, std::move(n));
  }
  double min_bound() const { return by_bound_.begin()->first; }
  Node pop_best() { return take(by_bound_.begin()->second); }
  Node pop_newest() { return take(nodes_.rbegin()->first); }

 private:
  Node take(long id) {
    auto it = nodes_.find(id);
    Node n = std::move(it->second);
    nodes_.erase(it);
    by_bound_.erase({n.bound, n.id});
    return n;
  }

  std::map<long, Node> nodes_;
  std::set<std::pair<double, long>> by_bound_;
};

class BranchAndBound {
 public:
  BranchAndBound(const MipInstance& canonical, const BnbConfig& cfg)
      : inst_(canonical), cfg_(cfg), lp_(build_lp_model(canonical)), locks_(compute_locks(canonical)) {
    for (int j = 0; j < inst_.num_vars(); ++j) {
      root_lb_.push_back(inst_.variables[j].lb);
      root_ub_.push_back(inst_.variables[j].ub);
    }
  }

  SolveResult run() {
    const auto start = Clock::now();
    SolveResult res;
    if (!cfg_.start_hint.empty()) {
      if (static_cast<int>(cfg_.start_hint.size()) != inst_.num_vars())
        throw std::invalid_argument("start hint dimension mismatch");
      const Eigen::VectorXd hint = Eigen::Map<const Eigen::VectorXd>(cfg_.start_hint.data(), inst_.num_vars());
      lp_.reset_basis(&hint);
    }

    OpenNodes open;
    std::optional<Node> dive = Node{next_id_++, -kInf, {}, nullptr};
    bool incomplete = false, unbounded = false, stopped = false;
    double running_bound = -kInf;

    auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - start).count(); };
    auto cutoff_reached = [&](double bound) {
      if (!incumbent_) return false;
      const double inc = incumbent_->objective;
      return inc - bound <= std::max(cfg_.gap_limit, 1e-9) * (1.0 + std::abs(inc));
    };

    while (dive || !open.empty()) {
      if (res.nodes >= cfg_.node_limit || elapsed() > cfg_.time_limit_s) {
        stopped = true;
        break;
      }
      Node node;
      bool jumped = false;
      if (dive) {
        node = std::move(*dive);
        dive.reset();
      } else {
        // Without an incumbent, backtrack to the sibling rather than the best bound.
        node = cfg_.mode == SolveMode::FirstFeasible ? open.pop_newest() : open.pop_best();
        jumped = true;
      }
      if (cutoff_reached(node.bound)) continue;

      activate(node, jumped);
      ++res.nodes;
      const LpStatus st = lp_.solve();
      if (st == LpStatus::Unbounded) {
        unbounded = true;
        break;
      }
      if (st == LpStatus::NumericalFailure) {
        incomplete = true;
      } else if (st == LpStatus::Optimal) {
        const double obj = lp_.objective();
        if (!cutoff_reached(obj)) {
          const Eigen::VectorXd x = lp_.primal();
          const int k = most_fractional(x);
          if (k < 0) {
            try_incumbent(x);
          } else {
            auto basis = std::make_shared<const LpSolver::Basis>(lp_.basis());
            const double down_ub = std::floor(x[k]), up_lb = std::ceil(x[k]);
            Node down{next_id_++, obj, node.changes, basis};
            down.changes.push_back({k, current_lb(k), down_ub});
            Node up{next_id_++, obj, node.changes, basis};
            up.changes.push_back({k, up_lb, current_ub(k)});
            // Plunge in the direction that locks fewer rows, else towards the nearer integer.
            const int ul = locks_.up[k], dl = locks_.down[k];
            const bool go_up = ul != dl ? ul < dl : x[k] - down_ub >= 0.5;
            dive = std::move(go_up ? up : down);
            open.push(std::move(go_up ? down : up));
          }
        }
      }

      double bound = incumbent_ ? incumbent_->objective : kInf;
      if (dive) bound = std::min(bound, dive->bound);
      if (!open.empty()) bound = std::min(bound, open.min_bound());
      running_bound = std::max(running_bound, bound);
      res.bound_history.push_back(running_bound);

      if (incumbent_ && cfg_.mode == SolveMode::FirstFeasible) {
        stopped = dive.has_value() || !open.empty();
        break;
      }
      if (incumbent_ && cutoff_reached(running_bound)) break;
    }

    res.wall_time_s = elapsed();
    if (unbounded) {
      res.status = SolveStatus::Unbounded;
      return res;
    }
    const bool exhausted = !stopped && !incomplete;
    double bound = incumbent_ ? incumbent_->objective : kInf;
    if (dive) bound = std::min(bound, dive->bound);
    if (!open.empty()) bound = std::min(bound, open.min_bound());
    if (incomplete) bound = std::min(bound, running_bound);
    running_bound = std::max(running_bound, bound);
    if (incumbent_ && running_bound > incumbent_->objective) running_bound = incumbent_->objective;

    if (incumbent_) {
      res.status = (exhausted || cutoff_reached(running_bound)) && !incomplete ? SolveStatus::Optimal
                                                                                : SolveStatus::Feasible;
    } else {
      res.status = exhausted ? SolveStatus::Infeasible : SolveStatus::LimitReached;
    }
    res.lower_bound = running_bound;
    if (incumbent_) res.incumbent = incumbent_;
    return res;
  }

 private:
  double current_lb(int j) const { return lp_.col_lb(j); }
  double current_ub(int j) const { return lp_.col_ub(j); }

  void activate(const Node& node, bool jumped) {
    for (int j : touched_) lp_.set_col_bounds(j, root_lb_[j], root_ub_[j]);
    touched_.clear();
    for (const auto& c : node.changes) {
      lp_.set_col_bounds(c.var, c.lb, c.ub);
      touched_.push_back(c.var);
    }
    if (jumped && node.basis) lp_.set_basis(*node.basis);
  }

  int most_fractional(const Eigen::VectorXd& x) const {
    int best = -1;
    double best_score = kIntTol;
    for (int j = 0; j < inst_.num_vars(); ++j) {
      if (!inst_.variables[j].is_integral()) continue;
      const double f = x[j] - std::floor(x[j]);
      const double score = std::min(f, 1.0 - f);
      if (score > best_score) {
        best_score = score;
        best = j;
      }
    }
    return best;
  }

  void try_incumbent(const Eigen::VectorXd& x) {
    Eigen::VectorXd rounded = x;
    for (int j = 0; j < inst_.num_vars(); ++j)
      if (inst_.variables[j].is_integral()) rounded[j] = std::round(x[j]);
    Solution s = evaluate_solution(inst_, rounded);
    if (!s.feasible) s = evaluate_solution(inst_, x);
    if (!s.feasible) return;
    if (!incumbent_ || s.objective < incumbent_->objective) incumbent_ = std::move(s);
  }

  const MipInstance& inst_;
  const BnbConfig& cfg_;
  LpSolver lp_;
  std::vector<double> root_lb_, root_ub_;
  std::vector<int> touched_;
  Locks locks_;
  std::optional<Solution> incumbent_;
  long next_id_ = 0;
};

SolveResult to_original_sense(SolveResult res, const MipInstance& original, bool negated) {
  if (res.incumbent) res.incumbent = evaluate_solution(original, res.incumbent->values);
  if (negated) res.lower_bound = -res.lower_bound;
  return res;
}

Constraint delta_row(const MipInstance& inst, const LocalBranchingSet& ref, double& ones) {
  if (ref.indices.size() != ref.values.size())
    throw std::invalid_argument("local branching: indices and values differ in length");
  Constraint row;
  ones = 0.0;
  for (std::size_t k = 0; k < ref.indices.size(); ++k) {
    const int j = ref.indices[k];
    if (j < 0 || j >= inst.num_vars() || inst.variables[j].vtype != VarType::Binary)
      throw std::invalid_argument("local branching set contains non-binary index " + std::to_string(j));
    if (ref.values[k] == 1) {
      row.coeffs.push_back({j, -1.0});
      ones += 1.0;
    } else {
      row.coeffs.push_back({j, 1.0});
    }
  }
  normalize_terms(row.coeffs);
  return row;
}

}  // namespace

SolveResult solve(const MipInstance& inst, const BnbConfig& cfg) {
  const CanonicalMip canon = canonicalize(inst);
  BranchAndBound bnb(canon.instance, cfg);
  return to_original_sense(bnb.run(), inst, canon.negated);
}

MipInstance apply_local_branching_cut(const MipInstance& inst, const LocalBranchingSet& ref, int phi) {
  if (phi < 0) throw std::invalid_argument("phi must be nonnegative");
  double ones = 0.0;
  Constraint row = delta_row(inst, ref, ones);
  MipInstance out = inst;
  // An empty sum gives 0 <= phi, which always holds.
  if (row.coeffs.empty()) return out;
  row.name = "local_branching";
  row.lhs = -kInf;
  row.rhs = phi - ones;
  out.constraints.push_back(std::move(row));
  return out;
}

SolveResult root_branch_solve(const MipInstance& inst, const LocalBranchingSet& ref, int phi,
                              const BnbConfig& cfg) {
  const auto start = Clock::now();
  SolveResult left = solve(apply_local_branching_cut(inst, ref, phi), cfg);

  double ones = 0.0;
  Constraint row = delta_row(inst, ref, ones);
  SolveResult right;
  if (row.coeffs.empty()) {
    // Delta is identically 0 < phi + 1.
    right.status = SolveStatus::Infeasible;
    right.lower_bound = inst.sense == Sense::Minimize ? kInf : -kInf;
  } else {
    MipInstance right_inst = inst;
    row.name = "local_branching_complement";
    row.lhs = phi + 1 - ones;
    row.rhs = kInf;
    right_inst.constraints.push_back(std::move(row));
    right = solve(right_inst, cfg);
  }

  const bool minimize = inst.sense == Sense::Minimize;
  auto better = [&](double a, double b) { return minimize ? a < b : a > b; };
  SolveResult merged;
  merged.nodes = left.nodes + right.nodes;
  for (const SolveResult* child : {&left, &right})
    if (child->incumbent && (!merged.incumbent || better(child->incumbent->objective, merged.incumbent->objective)))
      merged.incumbent = child->incumbent;

  auto child_bound = [&](const SolveResult& r) {
    if (r.status == SolveStatus::Infeasible) return minimize ? kInf : -kInf;
    return r.lower_bound;
  };
  merged.lower_bound = minimize ? std::min(child_bound(left), child_bound(right))
                                : std::max(child_bound(left), child_bound(right));

  auto proven = [](const SolveResult& r) {
    return r.status == SolveStatus::Optimal || r.status == SolveStatus::Infeasible;
  };
  if (left.status == SolveStatus::Unbounded || right.status == SolveStatus::Unbounded)
    merged.status = SolveStatus::Unbounded;
  else if (proven(left) && proven(right))
    merged.status = merged.incumbent ? SolveStatus::Optimal : SolveStatus::Infeasible;
  else
    merged.status = merged.incumbent ? SolveStatus::Feasible : SolveStatus::LimitReached;
  if (merged.status == SolveStatus::Optimal) merged.lower_bound = merged.incumbent->objective;
  merged.wall_time_s = std::chrono::duration<double>(Clock::now() - start).count();
  return merged;
}

std::optional<PresolveResult> presolve(const MipInstance& canonical) {
  const int n = canonical.num_vars();
  PresolveResult out;
  out.instance.name = canonical.name;
  out.instance.sense = canonical.sense;
  std::vector<int> new_index(n, -1);
  for (int j = 0; j < n; ++j) {
    const auto& v = canonical.variables[j];
    if (v.lb == v.ub) continue;
    new_index[j] = out.instance.num_vars();
    out.instance.variables.push_back(v);
    out.var_origin.push_back(j);
  }
  for (const auto& t : canonical.objective)
    if (new_index[t.var] >= 0) out.instance.objective.push_back({new_index[t.var], t.coef});
  for (int i = 0; i < canonical.num_rows(); ++i) {
    const auto& row = canonical.constraints[i];
    Constraint r{row.name, {}, row.lhs, row.rhs};
    double fixed = 0.0;
    for (const auto& t : row.coeffs) {
      if (t.coef == 0.0) continue;
      if (new_index[t.var] >= 0)
        r.coeffs.push_back({new_index[t.var], t.coef});
      else
        fixed += t.coef * canonical.variables[t.var].lb;
    }
    r.lhs -= fixed;
    r.rhs -= fixed;
    if (r.coeffs.empty()) {
      if (r.lhs > kFeasTol || r.rhs < -kFeasTol) return std::nullopt;
      continue;
    }
    out.instance.constraints.push_back(std::move(r));
    out.row_origin.push_back(i);
  }
  return out;
}

RootInfo collect_root_info(const MipInstance& inst) {
  const CanonicalMip canon = canonicalize(inst);
  auto pre = presolve(canon.instance);
  if (!pre) throw std::runtime_error("presolve detected infeasibility");
  RootInfo info;
  info.negated = canon.negated;
  info.presolved = std::move(pre->instance);
  info.var_origin = std::move(pre->var_origin);
  info.row_origin = std::move(pre->row_origin);
  info.lp = solve_lp(info.presolved);
  if (info.lp.status != LpStatus::Optimal)
    throw std::runtime_error(std::string("root LP not optimal: ") + to_string(info.lp.status));
  const int n = info.presolved.num_vars();
  auto locks = compute_locks(info.presolved);
  info.up_locks = std::move(locks.up);
  info.down_locks = std::move(locks.down);
  info.pseudocosts.assign(n, {0.0, 0.0});
  return info;
}

}  // namespace mipgcn
