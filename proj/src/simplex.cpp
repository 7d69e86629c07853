#include "mipgcn/simplex.hpp"


#include <algorithm>
#include <cmath>
#include <cstdint>

namespace mipgcn {

const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
    case LpStatus::NumericalFailure: return "numerical_failure";
  }
  return "?";
}

LpModel build_lp_model(const MipInstance& inst, const BoundOverrides& overrides,
                       const std::vector<Constraint>& extra_rows) {
  if (inst.sense != Sense::Minimize)
    throw std::invalid_argument("LP relaxation expects a canonical (minimize) instance");
  const int n = inst.num_vars();
  const int m = inst.num_rows() + static_cast<int>(extra_rows.size());
  LpModel model;
  model.cost = inst.objective_dense();
  model.col_lb.resize(n);
  model.col_ub.resize(n);
  for (int j = 0; j < n; ++j) {
    model.col_lb[j] = inst.variables[j].lb;
    model.col_ub[j] = inst.variables[j].ub;
  }
  for (const auto& [j, b] : overrides) {
    if (j < 0 || j >= n) throw std::out_of_range("bound override for unknown variable");
    model.col_lb[j] = b.first;
    model.col_ub[j] = b.second;
  }
  model.row_lb.resize(m);
  model.row_ub.resize(m);
  std::vector<Eigen::Triplet<double>> trips;
  int i = 0;
  auto add = [&](const Constraint& row) {
    for (const auto& t : row.coeffs) trips.emplace_back(i, t.var, t.coef);
    model.row_lb[i] = row.lhs;
    model.row_ub[i] = row.rhs;
    ++i;
  };
  for (const auto& row : inst.constraints) add(row);
  for (const auto& row : extra_rows) add(row);
  model.A.resize(m, n);
  model.A.setFromTriplets(trips.begin(), trips.end());
  model.A.makeCompressed();
  return model;
}

LpSolver::LpSolver(LpModel model)
    : n_(model.cols()), m_(model.rows()), A_(std::move(model.A)) {
  const int total = n_ + m_;
  cost_ = Eigen::VectorXd::Zero(total);
  cost_.head(n_) = model.cost;
  lb_.resize(total);
  ub_.resize(total);
  lb_.head(n_) = model.col_lb;
  ub_.head(n_) = model.col_ub;
  lb_.tail(m_) = model.row_lb;
  ub_.tail(m_) = model.row_ub;
  x_ = Eigen::VectorXd::Zero(total);
  head_.resize(m_);
  pos_.assign(total, -1);
  state_.assign(total, kLower);
  reset_basis();
}

void LpSolver::place_nonbasic(int j, const Eigen::VectorXd* hint) {
  const bool has_lb = std::isfinite(lb_[j]), has_ub = std::isfinite(ub_[j]);
  if (has_lb && has_ub) {
    bool upper = state_[j] == kUpper;
    if (hint != nullptr) upper = std::abs((*hint)[j] - ub_[j]) < std::abs((*hint)[j] - lb_[j]);
    state_[j] = upper ? kUpper : kLower;
  } else if (has_lb) {
    state_[j] = kLower;
  } else if (has_ub) {
    state_[j] = kUpper;
  } else {
    state_[j] = kFree;
  }
  x_[j] = state_[j] == kLower ? lb_[j] : state_[j] == kUpper ? ub_[j] : 0.0;
}

void LpSolver::reset_basis(const Eigen::VectorXd* hint) {
  for (int j = 0; j < n_; ++j) {
    pos_[j] = -1;
    state_[j] = kLower;
    place_nonbasic(j, hint);
  }
  for (int i = 0; i < m_; ++i) {
    head_[i] = n_ + i;
    pos_[n_ + i] = i;
    state_[n_ + i] = kBasic;
  }
  dse_.assign(m_, 1.0);
  refactor();
  recompute_basic_values();
}

void LpSolver::set_basis(const Basis& b) {
  head_ = b.head;
  state_ = b.state;
  std::fill(pos_.begin(), pos_.end(), -1);
  for (int r = 0; r < m_; ++r) pos_[head_[r]] = r;
  dse_.assign(m_, 1.0);
  for (int j = 0; j < n_ + m_; ++j)
    if (state_[j] != kBasic) place_nonbasic(j, nullptr);
  factor_valid_ = false;
}

void LpSolver::set_col_bounds(int j, double lb, double ub) {
  lb_[j] = lb;
  ub_[j] = ub;
  // Basic values are recomputed at the start of the next solve.
  if (state_[j] != kBasic) place_nonbasic(j, nullptr);
}

Eigen::VectorXd LpSolver::ftran(Eigen::VectorXd v) const {
  if (m_ == 0) return v;
  v = factor_.ftran(v);
  for (const auto& e : etas_) {
    const double t = v[e.row] / e.pivot;
    if (t == 0.0) continue;
    v[e.row] = t;
    for (const auto& [i, a] : e.entries) v[i] -= a * t;
  }
  return v;
}

Eigen::VectorXd LpSolver::btran(Eigen::VectorXd v) const {
  if (m_ == 0) return v;
  for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
    double s = v[it->row];
    for (const auto& [i, a] : it->entries) s -= a * v[i];
    v[it->row] = s / it->pivot;
  }
  return factor_.btran(v);
}

Eigen::VectorXd LpSolver::column_ftran(int j) const {
  Eigen::VectorXd col = Eigen::VectorXd::Zero(m_);
  if (j >= n_) {
    col[j - n_] = -1.0;
  } else {
    for (Eigen::SparseMatrix<double>::InnerIterator it(A_, j); it; ++it) col[it.row()] = it.value();
  }
  return ftran(std::move(col));
}

double LpSolver::dot_column(const Eigen::VectorXd& y, int j) const {
  if (j >= n_) return -y[j - n_];
  double s = 0.0;
  for (Eigen::SparseMatrix<double>::InnerIterator it(A_, j); it; ++it) s += it.value() * y[it.row()];
  return s;
}

bool LpSolver::refactor() {
  since_refactor_ = 0;
  etas_.clear();
  if (m_ == 0) {
    factor_valid_ = true;
    return true;
  }
  std::vector<BasisFactor::Column> cols(m_);
  for (int r = 0; r < m_; ++r) {
    const int j = head_[r];
    if (j >= n_) {
      cols[r].emplace_back(j - n_, -1.0);
    } else {
      for (Eigen::SparseMatrix<double>::InnerIterator it(A_, j); it; ++it) cols[r].emplace_back(it.row(), it.value());
    }
  }
  factor_valid_ = factor_.factor(m_, std::move(cols));
  return factor_valid_;
}

void LpSolver::recompute_basic_values() {
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m_);
  for (int j = 0; j < n_; ++j)
    if (state_[j] != kBasic && x_[j] != 0.0)
      for (Eigen::SparseMatrix<double>::InnerIterator it(A_, j); it; ++it) rhs[it.row()] -= it.value() * x_[j];
  for (int i = 0; i < m_; ++i)
    if (state_[n_ + i] != kBasic) rhs[i] += x_[n_ + i];
  const Eigen::VectorXd xb = ftran(std::move(rhs));
  for (int r = 0; r < m_; ++r) x_[head_[r]] = xb[r];
}

double LpSolver::max_infeasibility() const {
  double worst = 0.0;
  for (int r = 0; r < m_; ++r) {
    const int j = head_[r];
    worst = std::max({worst, lb_[j] - x_[j], x_[j] - ub_[j]});
  }
  return worst;
}

Eigen::VectorXd LpSolver::compute_duals(bool phase_one) const {
  Eigen::VectorXd cb(m_);
  for (int r = 0; r < m_; ++r) {
    const int j = head_[r];
    if (phase_one)
      cb[r] = x_[j] < lb_[j] - kPrimalTol ? -1.0 : x_[j] > ub_[j] + kPrimalTol ? 1.0 : 0.0;
    else
      cb[r] = cost_[j];
  }
  return btran(std::move(cb));
}

bool LpSolver::make_dual_feasible() {
  const Eigen::VectorXd y = compute_duals(false);
  bool flipped = false;
  for (int j = 0; j < n_ + m_; ++j) {
    const auto st = state_[j];
    if (st == kBasic || lb_[j] == ub_[j]) continue;
    const double d = cost_[j] - dot_column(y, j);
    if (st == kFree) {
      if (std::abs(d) > kDualTol) return false;
    } else if (st == kLower && d < -kDualTol) {
      if (!std::isfinite(ub_[j])) return false;
      state_[j] = kUpper;
      x_[j] = ub_[j];
      flipped = true;
    } else if (st == kUpper && d > kDualTol) {
      if (!std::isfinite(lb_[j])) return false;
      state_[j] = kLower;
      x_[j] = lb_[j];
      flipped = true;
    }
  }
  if (flipped) recompute_basic_values();
  return true;
}

LpSolver::DualResult LpSolver::dual_loop() {
  const int total = n_ + m_;
  const long max_iters = 20L * total + 1000;
  int verify_rounds = 0;
  // Reduced costs and the pivot row are updated in place between refactorizations.
  Eigen::VectorXd d(total), row = Eigen::VectorXd::Zero(total);
  auto refresh = [&] {
    const Eigen::VectorXd y = compute_duals(false);
    for (int j = 0; j < total; ++j) d[j] = state_[j] == kBasic ? 0.0 : cost_[j] - dot_column(y, j);
  };
  auto restart = [&] {
    if (!refactor()) return false;
    recompute_basic_values();
    refresh();
    return true;
  };
  refresh();
  for (long iter = 0; iter < max_iters; ++iter) {
    if (since_refactor_ >= kRefactorPeriod && !restart()) return DualResult::Stalled;
    // Leaving row by dual steepest edge: violation^2 / ||row of B^-1||^2.
    int r = -1;
    double worst = 0.0;
    for (int i = 0; i < m_; ++i) {
      const int j = head_[i];
      const double v = std::max(lb_[j] - x_[j], x_[j] - ub_[j]);
      if (v <= kPrimalTol) continue;
      const double score = v * v / dse_[i];
      if (score > worst) {
        worst = score;
        r = i;
      }
    }
    if (r < 0) {
      if (since_refactor_ > 0 && verify_rounds < 3) {
        ++verify_rounds;
        if (!restart()) return DualResult::Stalled;
        continue;
      }
      return DualResult::Optimal;
    }
    const int out = head_[r];
    const double s = x_[out] > ub_[out] ? 1.0 : -1.0;
    const double target = s > 0 ? ub_[out] : lb_[out];

    Eigen::VectorXd er = Eigen::VectorXd::Zero(m_);
    er[r] = 1.0;
    Eigen::VectorXd rho = btran(std::move(er));

    // Harris two-pass ratio test over the pivot row.
    struct Cand {
      int j;
      double a, d;
    };
    std::vector<Cand> cands;
    for (int j = 0; j < total; ++j) {
      const auto st = state_[j];
      row[j] = 0.0;
      if (st == kBasic || lb_[j] == ub_[j]) continue;
      row[j] = dot_column(rho, j);
      const double a = s * row[j];
      if (std::abs(a) < kPivotTol) continue;
      if (st == kFree || (st == kLower && a > 0) || (st == kUpper && a < 0)) cands.push_back({j, a, d[j]});
    }
    if (cands.empty()) {
      if (since_refactor_ > 0 && verify_rounds < 3) {
        ++verify_rounds;
        if (!restart()) return DualResult::Stalled;
        continue;
      }
      return DualResult::Infeasible;
    }
    // Bound flipping: pass breakpoints of boxed columns while the dual
    // objective keeps improving, then pick the entering column among the rest.
    auto ratio_of = [&](const Cand& c) {
      return state_[c.j] == kFree ? std::abs(c.d) / std::abs(c.a) : std::max(0.0, c.d / c.a);
    };
    std::sort(cands.begin(), cands.end(), [&](const Cand& a, const Cand& b) {
      const double ra = ratio_of(a), rb = ratio_of(b);
      return ra != rb ? ra < rb : a.j < b.j;
    });
    double slope = std::max(lb_[out] - x_[out], x_[out] - ub_[out]);
    std::size_t first = 0;
    for (; first < cands.size(); ++first) {
      const int j = cands[first].j;
      const double range = ub_[j] - lb_[j];
      if (state_[j] == kFree || !std::isfinite(range)) break;
      const double next = slope - std::abs(cands[first].a) * range;
      if (next <= 0.0) break;
      slope = next;
    }
    if (first == cands.size()) {
      if (since_refactor_ > 0 && verify_rounds < 3) {
        ++verify_rounds;
        if (!restart()) return DualResult::Stalled;
        continue;
      }
      return DualResult::Infeasible;
    }
    double t_max = kInf;
    for (std::size_t k = first; k < cands.size(); ++k) {
      const auto& c = cands[k];
      const double bound = state_[c.j] == kFree ? (std::abs(c.d) + kDualTol) / std::abs(c.a)
                                                : (c.d + (c.a > 0 ? kDualTol : -kDualTol)) / c.a;
      t_max = std::min(t_max, bound);
    }
    int q = -1;
    double best_piv = 0.0;
    for (std::size_t k = first; k < cands.size(); ++k) {
      const auto& c = cands[k];
      if (ratio_of(c) <= t_max && std::abs(c.a) > best_piv) {
        best_piv = std::abs(c.a);
        q = c.j;
      }
    }
    if (q < 0) return DualResult::Stalled;
    if (first > 0) {
      Eigen::VectorXd delta = Eigen::VectorXd::Zero(m_);
      for (std::size_t k = 0; k < first; ++k) {
        const int j = cands[k].j;
        const double to = state_[j] == kLower ? ub_[j] : lb_[j];
        const double dx = to - x_[j];
        if (j >= n_) {
          delta[j - n_] -= dx;
        } else {
          for (Eigen::SparseMatrix<double>::InnerIterator it(A_, j); it; ++it) delta[it.row()] += it.value() * dx;
        }
        x_[j] = to;
        state_[j] = state_[j] == kLower ? kUpper : kLower;
      }
      const Eigen::VectorXd dxb = ftran(std::move(delta));
      for (int i = 0; i < m_; ++i) x_[head_[i]] -= dxb[i];
    }

    const Eigen::VectorXd alpha = column_ftran(q);
    if (std::abs(alpha[r] - row[q]) > 1e-6 * (1 + std::abs(row[q])) || std::abs(alpha[r]) < kPivotTol) {
      // Row and column disagree: the factorization has drifted.
      if (since_refactor_ == 0 || !restart()) return DualResult::Stalled;
      continue;
    }
    // Forrest-Goldfarb weight update; tau = B^-1 rho.
    const Eigen::VectorXd tau = ftran(rho);
    const double wr = rho.squaredNorm();
    for (int i = 0; i < m_; ++i) {
      if (i == r || alpha[i] == 0.0) continue;
      const double k = alpha[i] / alpha[r];
      const double w = dse_[i] - 2.0 * k * tau[i] + k * k * wr;
      dse_[i] = std::isfinite(w) ? std::max(w, 1e-4) : 1.0;
    }
    const double w = wr / (alpha[r] * alpha[r]);
    dse_[r] = std::isfinite(w) ? std::max(w, 1e-4) : 1.0;

    const double step = (x_[out] - target) / alpha[r];
    for (int i = 0; i < m_; ++i) x_[head_[i]] -= step * alpha[i];
    x_[q] += step;
    ++total_iters_;

    const double theta = d[q] / row[q];
    for (int j = 0; j < total; ++j)
      if (row[j] != 0.0) d[j] -= theta * row[j];
    d[q] = 0.0;
    d[out] = -theta;

    x_[out] = target;
    state_[out] = s > 0 ? kUpper : kLower;
    pos_[out] = -1;
    head_[r] = q;
    pos_[q] = r;
    state_[q] = kBasic;
    Eta eta{r, alpha[r], {}};
    for (int i = 0; i < m_; ++i)
      if (i != r && std::abs(alpha[i]) > 1e-13) eta.entries.emplace_back(i, alpha[i]);
    etas_.push_back(std::move(eta));
    ++since_refactor_;
  }
  return DualResult::Stalled;
}

LpStatus LpSolver::solve() {
  if (!factor_valid_ && !refactor()) reset_basis();
  recompute_basic_values();
  if (max_infeasibility() > kPrimalTol && make_dual_feasible()) {
    // Spread tied reduced costs apart in the dual-feasible direction; the true
    // costs come back before the primal pass below cleans up.
    const Eigen::VectorXd saved = cost_;
    for (int j = 0; j < n_; ++j) {
      if (state_[j] == kBasic || lb_[j] == ub_[j]) continue;
      const double u = static_cast<double>((static_cast<std::uint64_t>(j) * 0x9E3779B97F4A7C15ULL) >> 40) / double(1 << 24);
      const double eps = 1e-6 * (1.0 + std::abs(cost_[j])) * (1.0 + u);
      if (state_[j] == kLower) cost_[j] += eps;
      else if (state_[j] == kUpper) cost_[j] -= eps;
    }
    const auto res = dual_loop();
    cost_ = saved;
    if (res == DualResult::Infeasible) {
      status_ = LpStatus::Infeasible;
      return status_;
    }
  }
  return primal_loop();
}

LpStatus LpSolver::primal_loop() {
  const int total = n_ + m_;
  const long max_iters = 50L * total + 10000;
  const long bland_after = 10L * total;
  long degenerate_run = 0;
  bool bland = false;
  int verify_rounds = 0;

  for (long iter = 0; iter < max_iters; ++iter) {
    if (since_refactor_ >= kRefactorPeriod) {
      if (!refactor()) reset_basis();
      recompute_basic_values();
    }
    const bool phase_one = max_infeasibility() > kPrimalTol;
    const Eigen::VectorXd y = compute_duals(phase_one);

    // Pricing.
    int q = -1;
    double best = 0.0;
    int dir = 0;
    for (int j = 0; j < total; ++j) {
      const auto st = state_[j];
      if (st == kBasic || lb_[j] == ub_[j]) continue;
      const double d = (phase_one ? 0.0 : cost_[j]) - dot_column(y, j);
      int jdir = 0;
      if ((st == kLower || st == kFree) && d < -kDualTol) jdir = 1;
      else if ((st == kUpper || st == kFree) && d > kDualTol) jdir = -1;
      if (jdir == 0) continue;
      if (bland) {
        q = j;
        dir = jdir;
        break;
      }
      if (std::abs(d) > best) {
        best = std::abs(d);
        q = j;
        dir = jdir;
      }
    }

    if (q < 0) {
      // Confirm on a fresh factorization before declaring a terminal status.
      if (since_refactor_ > 0 && verify_rounds < 3) {
        ++verify_rounds;
        if (!refactor()) reset_basis();
        recompute_basic_values();
        continue;
      }
      status_ = phase_one ? LpStatus::Infeasible : LpStatus::Optimal;
      return status_;
    }

    const Eigen::VectorXd alpha = column_ftran(q);
    // x_B(t) = x_B - t * dir * alpha. `rate` is the per-unit decrease of each basic value.
    auto target_of = [&](int r, double rate, bool relaxed, double& ratio, double& target) {
      const int j = head_[r];
      const double v = x_[j], l = lb_[j], u = ub_[j];
      const double tol = relaxed ? kPrimalTol : 0.0;
      if (v < l - kPrimalTol) {
        if (rate < 0) { target = l; ratio = (l - v + tol) / -rate; return true; }
        return false;
      }
      if (v > u + kPrimalTol) {
        if (rate > 0) { target = u; ratio = (v - u + tol) / rate; return true; }
        return false;
      }
      if (rate > 0 && std::isfinite(l)) { target = l; ratio = (v - l + tol) / rate; return true; }
      if (rate < 0 && std::isfinite(u)) { target = u; ratio = (u - v + tol) / -rate; return true; }
      return false;
    };

    double t_max = kInf;
    for (int r = 0; r < m_; ++r) {
      const double rate = dir * alpha[r];
      if (std::abs(rate) < kPivotTol) continue;
      double ratio, target;
      if (target_of(r, rate, !bland, ratio, target)) t_max = std::min(t_max, ratio);
    }
    int leave = -1;
    double leave_target = 0.0, step = kInf, best_piv = 0.0;
    for (int r = 0; r < m_; ++r) {
      const double rate = dir * alpha[r];
      if (std::abs(rate) < kPivotTol) continue;
      double ratio, target;
      if (!target_of(r, rate, false, ratio, target) || ratio > t_max + (bland ? 1e-12 : 0.0)) continue;
      const bool better = bland ? (leave < 0 || head_[r] < head_[leave]) : std::abs(rate) > best_piv;
      if (better) {
        leave = r;
        leave_target = target;
        step = std::max(0.0, ratio);
        best_piv = std::abs(rate);
      }
    }
    const double range = ub_[q] - lb_[q];
    const bool flip = std::isfinite(range) && range <= step;
    if (flip) step = range;
    if (!std::isfinite(step)) {
      status_ = phase_one ? LpStatus::NumericalFailure : LpStatus::Unbounded;
      return status_;
    }

    ++total_iters_;
    if (step <= 1e-12) {
      if (++degenerate_run > bland_after) bland = true;
    } else {
      degenerate_run = 0;
    }

    for (int r = 0; r < m_; ++r) x_[head_[r]] -= step * dir * alpha[r];
    x_[q] += step * dir;

    if (flip) {
      state_[q] = dir > 0 ? kUpper : kLower;
      x_[q] = dir > 0 ? ub_[q] : lb_[q];
      continue;
    }

    const int out = head_[leave];
    x_[out] = leave_target;
    state_[out] = leave_target == lb_[out] ? kLower : kUpper;
    pos_[out] = -1;
    head_[leave] = q;
    pos_[q] = leave;
    state_[q] = kBasic;

    Eta eta{leave, alpha[leave], {}};
    for (int r = 0; r < m_; ++r)
      if (r != leave && alpha[r] != 0.0) eta.entries.emplace_back(r, alpha[r]);
    etas_.push_back(std::move(eta));
    ++since_refactor_;
  }
  status_ = LpStatus::NumericalFailure;
  return status_;
}

double LpSolver::objective() const { return cost_.head(n_).dot(x_.head(n_)); }

LpSolution LpSolver::solution() const {
  LpSolution s;
  s.status = status_;
  s.x = x_.head(n_);
  s.objective = objective();
  s.iterations = total_iters_;
  const Eigen::VectorXd y = compute_duals(false);
  s.duals = y;
  s.reduced_costs.resize(n_);
  for (int j = 0; j < n_; ++j) s.reduced_costs[j] = state_[j] == kBasic ? 0.0 : cost_[j] - dot_column(y, j);
  // Round-off multipliers pointing at an infinite side would turn into inf * 0 later.
  auto clean = [](double& v, double lo, double hi) {
    if (std::abs(v) > kDualTol) return;
    if ((v > 0 && !std::isfinite(lo)) || (v < 0 && !std::isfinite(hi))) v = 0.0;
  };
  for (int i = 0; i < m_; ++i) {
    if (state_[n_ + i] == kBasic) s.duals[i] = 0.0;
    clean(s.duals[i], lb_[n_ + i], ub_[n_ + i]);
  }
  for (int j = 0; j < n_; ++j) clean(s.reduced_costs[j], lb_[j], ub_[j]);
  auto conv = [](signed char st) {
    return st == kBasic ? BasisStatus::Basic : st == kUpper ? BasisStatus::AtUpper : BasisStatus::AtLower;
  };
  for (int j = 0; j < n_; ++j) s.var_basis.push_back(conv(state_[j]));
  for (int i = 0; i < m_; ++i) s.row_basis.push_back(conv(state_[n_ + i]));
  return s;
}

LpSolution solve_lp(const MipInstance& inst, const BoundOverrides& overrides,
                    const std::vector<Constraint>& extra_rows) {
  LpSolver solver(build_lp_model(inst, overrides, extra_rows));
  solver.solve();
  return solver.solution();
}

}  // namespace mipgcn
