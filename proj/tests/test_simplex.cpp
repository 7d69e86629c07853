#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mipgcn/basis_factor.hpp"
#include "mipgcn/generators.hpp"
#include "mipgcn/mip.hpp"
#include "mipgcn/simplex.hpp"
#include "test_support.hpp"

#include <cmath>
#include <algorithm>
#include <random>

using namespace mipgcn;
namespace oracle = mipgcn::testing;

namespace {

MipInstance relax(MipInstance m) {
  for (auto& v : m.variables) v.vtype = VarType::Continuous;
  return canonicalize(m).instance;
}

MipInstance random_lp(std::mt19937_64& rng, int n, int m) {
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::uniform_int_distribution<int> kind(0, 3);
  MipInstance inst;
  for (int j = 0; j < n; ++j) {
    double lb = std::floor(u(rng));
    inst.variables.push_back({"x" + std::to_string(j), VarType::Continuous, lb, lb + 1 + std::abs(u(rng))});
    inst.objective.push_back({j, u(rng)});
  }
  for (int i = 0; i < m; ++i) {
    Constraint c;
    c.name = "r" + std::to_string(i);
    for (int j = 0; j < n; ++j)
      if (kind(rng) != 0) c.coeffs.push_back({j, std::round(u(rng) * 4) / 4});
    normalize_terms(c.coeffs);
    if (c.coeffs.empty()) c.coeffs.push_back({i % n, 1.0});
    double mid = u(rng);
    switch (kind(rng)) {
      case 0: c.lhs = -kInf; c.rhs = mid; break;
      case 1: c.lhs = mid; c.rhs = kInf; break;
      case 2: c.lhs = c.rhs = mid; break;
      default: c.lhs = mid - 2; c.rhs = mid + 2; break;
    }
    inst.constraints.push_back(c);
  }
  return inst;
}

}  // namespace

TEST_CASE("two-variable example matches vertex enumeration") {
  MipInstance m;
  m.variables = {{"x1", VarType::Continuous, 0, 1}, {"x2", VarType::Continuous, 0, 1}};
  m.constraints = {{"c", {{0, 1.0}, {1, 1.0}}, -kInf, 1.0}};
  m.objective = {{0, -1.0}, {1, -1.0}};
  auto v = oracle::vertex_enumeration_lp(m);
  auto lp = solve_lp(m);
  REQUIRE(lp.status == LpStatus::Optimal);
  CHECK(v.objective == doctest::Approx(-1.0));
  CHECK(lp.objective == doctest::Approx(v.objective).epsilon(1e-9));
  CHECK(lp.duals[0] <= 1e-9);
}

TEST_CASE("random bounded LPs agree with vertex enumeration and the tableau oracle") {
  std::mt19937_64 rng(7);
  int checked = 0, infeasible = 0;
  for (int trial = 0; trial < 300; ++trial) {
    auto inst = random_lp(rng, 2 + trial % 3, 1 + trial % 4);
    auto v = oracle::vertex_enumeration_lp(inst);
    auto t = oracle::tableau_lp(inst);
    auto lp = solve_lp(inst);
    CHECK(v.feasible == t.feasible);
    if (!v.feasible) {
      CHECK(lp.status == LpStatus::Infeasible);
      ++infeasible;
      continue;
    }
    REQUIRE(lp.status == LpStatus::Optimal);
    CHECK(std::abs(lp.objective - v.objective) <= 1e-7 * (1 + std::abs(v.objective)));
    CHECK(std::abs(t.objective - v.objective) <= 1e-7 * (1 + std::abs(v.objective)));
    CHECK(evaluate_solution(inst, lp.x).max_violation <= 1e-6);
    ++checked;
  }
  CHECK(checked > 100);
  CHECK(infeasible > 0);
}

TEST_CASE("strong duality and dual signs") {
  for (auto p : kAllProblems) {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
      auto inst = relax(generate({p, seed < 4 ? "tiny" : "tinyplus", {}, seed}));
      auto lp = solve_lp(inst);
      REQUIRE(lp.status == LpStatus::Optimal);
      // Dual objective: sum over active row sides plus reduced-cost bound terms.
      double dual_obj = 0.0;
      for (int i = 0; i < inst.num_rows(); ++i) {
        double y = lp.duals[i];
        const auto& r = inst.constraints[i];
        if (y > 0) dual_obj += y * r.lhs;
        else if (y < 0) dual_obj += y * r.rhs;
      }
      for (int j = 0; j < inst.num_vars(); ++j) {
        double d = lp.reduced_costs[j];
        if (d > 0) dual_obj += d * inst.variables[j].lb;
        else if (d < 0) dual_obj += d * inst.variables[j].ub;
      }
      CHECK(std::abs(dual_obj - lp.objective) <= 1e-6 * (1 + std::abs(lp.objective)));
      auto t = oracle::tableau_lp(inst);
      CHECK(std::abs(t.objective - lp.objective) <= 1e-6 * (1 + std::abs(lp.objective)));
    }
  }
}

TEST_CASE("unbounded and infeasible detection") {
  MipInstance m;
  m.variables = {{"x", VarType::Continuous, 0, kInf}, {"y", VarType::Continuous, 0, kInf}};
  m.constraints = {{"c", {{0, 1.0}, {1, -1.0}}, -kInf, 1.0}};
  m.objective = {{0, -1.0}, {1, -1.0}};
  CHECK(solve_lp(m).status == LpStatus::Unbounded);

  m.objective = {{0, 1.0}};
  m.constraints.push_back({"d", {{0, 1.0}, {1, 1.0}}, -kInf, -1.0});
  CHECK(solve_lp(m).status == LpStatus::Infeasible);
}

TEST_CASE("free variables and equality rows") {
  MipInstance m;
  m.variables = {{"x", VarType::Continuous, -kInf, kInf}, {"y", VarType::Continuous, 0, 10}};
  m.constraints = {{"e", {{0, 1.0}, {1, 1.0}}, 3.0, 3.0}};
  m.objective = {{1, -1.0}};
  auto lp = solve_lp(m);
  REQUIRE(lp.status == LpStatus::Optimal);
  CHECK(lp.objective == doctest::Approx(-10.0));
  CHECK(lp.x[0] == doctest::Approx(-7.0));
}

TEST_CASE("warm start after bound change matches cold solve") {
  std::mt19937_64 rng(11);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto inst = relax(generate({ProblemType::SC, "tinyplus", {}, seed}));
    LpSolver warm(build_lp_model(inst));
    REQUIRE(warm.solve() == LpStatus::Optimal);
    BoundOverrides ov;
    for (int k = 0; k < 4; ++k) {
      int j = std::uniform_int_distribution<int>(0, inst.num_vars() - 1)(rng);
      double v = (k % 2) ? 1.0 : 0.0;
      ov[j] = {v, v};
      warm.set_col_bounds(j, v, v);
      auto ws = warm.solve();
      auto cold = solve_lp(inst, ov);
      CHECK((ws == LpStatus::Optimal) == (cold.status == LpStatus::Optimal));
      if (ws == LpStatus::Optimal && cold.status == LpStatus::Optimal)
        CHECK(std::abs(warm.objective() - cold.objective) <= 1e-7 * (1 + std::abs(cold.objective)));
    }
  }
}

TEST_CASE("basis save and restore") {
  auto inst = relax(generate({ProblemType::MK, "tinyplus", {}, 3}));
  LpSolver s(build_lp_model(inst));
  REQUIRE(s.solve() == LpStatus::Optimal);
  const double obj = s.objective();
  auto b = s.basis();
  s.set_col_bounds(0, 0, 0);
  s.solve();
  s.set_col_bounds(0, 0, 1);
  s.set_basis(b);
  REQUIRE(s.solve() == LpStatus::Optimal);
  CHECK(s.objective() == doctest::Approx(obj));
}

TEST_CASE("one-variable examples") {
  MipInstance m;
  m.variables = {{"x", VarType::Continuous, 0, kInf}};
  m.constraints = {{"c", {{0, 1.0}}, 1.0, kInf}};
  m.objective = {{0, 1.0}};
  auto lp = solve_lp(m);
  REQUIRE(lp.status == LpStatus::Optimal);
  CHECK(lp.x[0] == doctest::Approx(1.0));
  CHECK(lp.objective == doctest::Approx(1.0));
  CHECK(lp.duals[0] == doctest::Approx(1.0));

  m.constraints = {{"c", {{0, 1.0}}, -kInf, -1.0}};
  CHECK(solve_lp(m).status == LpStatus::Infeasible);
}

TEST_CASE("relaxation matches the tableau oracle on tinyplus presets") {
  for (auto p : kAllProblems)
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      auto inst = relax(generate({p, "tinyplus", {}, seed}));
      auto lp = solve_lp(inst);
      auto t = oracle::tableau_lp(inst);
      CAPTURE(inst.name);
      REQUIRE(t.feasible);
      REQUIRE(lp.status == LpStatus::Optimal);
      CHECK(std::abs(lp.objective - t.objective) <= 1e-6 * (1 + std::abs(t.objective)));
    }
}

TEST_CASE("basis factor solves match dense solves") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::bernoulli_distribution sparse(0.15), slack(0.4);
  for (int trial = 0; trial < 50; ++trial) {
    const int m = 3 + trial % 25;
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(m, m);
    std::vector<BasisFactor::Column> cols(m);
    for (int c = 0; c < m; ++c) {
      if (slack(rng)) {
        B(c, c) = -1.0;
      } else {
        B(c, c) = 3.0 + u(rng);  // keeps the matrix comfortably nonsingular
        for (int r = 0; r < m; ++r)
          if (r != c && sparse(rng)) B(r, c) = u(rng);
      }
    }
    // Shuffle columns so singletons are not already in order.
    std::vector<int> perm(m);
    for (int k = 0; k < m; ++k) perm[k] = k;
    std::shuffle(perm.begin(), perm.end(), rng);
    Eigen::MatrixXd P(m, m);
    for (int k = 0; k < m; ++k) P.col(k) = B.col(perm[k]);
    for (int c = 0; c < m; ++c)
      for (int r = 0; r < m; ++r)
        if (P(r, c) != 0.0) cols[c].emplace_back(r, P(r, c));
    BasisFactor f;
    REQUIRE(f.factor(m, cols));
    const Eigen::VectorXd b = Eigen::VectorXd::Random(m);
    const Eigen::VectorXd x = f.ftran(b);
    const Eigen::VectorXd y = f.btran(b);
    CHECK((P * x - b).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((P.transpose() * y - b).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("singular basis is reported") {
  std::vector<BasisFactor::Column> cols = {{{0, 1.0}, {1, 1.0}}, {{0, 2.0}, {1, 2.0}}};
  BasisFactor f;
  CHECK_FALSE(f.factor(2, cols));
}
