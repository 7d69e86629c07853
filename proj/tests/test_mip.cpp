#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mipgcn/mip.hpp"

#include <Eigen/Dense>

using namespace mipgcn;

namespace {

MipInstance small_max() {
  MipInstance m;
  m.name = "toy";
  m.sense = Sense::Maximize;
  m.variables = {{"x", VarType::Binary, 0, 1}, {"y", VarType::Continuous, 0, 4}};
  m.constraints = {{"c0", {{0, 2.0}, {1, 1.0}}, -kInf, 5.0}};
  m.objective = {{0, 3.0}, {1, 1.0}};
  return m;
}

}  // namespace

TEST_CASE("json round trip keeps every field") {
  auto m = small_max();
  m.constraints.push_back({"eq", {{1, 1.0}}, 2.0, 2.0});
  auto back = instance_from_json_text(instance_to_json_text(m));
  CHECK(back == m);
  CHECK(instance_to_json_text(back) == instance_to_json_text(m));
}

TEST_CASE("unknown variable type is rejected with a path") {
  auto text = instance_to_json_text(small_max());
  auto pos = text.find("\"continuous\"");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 12, "\"ternary\"");
  try {
    instance_from_json_text(text);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    std::string msg = e.what();
    CHECK(msg.find("variables[1]") != std::string::npos);
    CHECK(msg.find("ternary") != std::string::npos);
  }
}

TEST_CASE("unknown keys are rejected") {
  auto text = instance_to_json_text(small_max());
  text.insert(1, "\"extra\": 1,");
  CHECK_THROWS_AS(instance_from_json_text(text), ParseError);
}

TEST_CASE("validation catches structural errors") {
  auto m = small_max();
  CHECK(validate_instance(m).empty());

  auto bad = m;
  bad.constraints[0].coeffs.push_back({7, 1.0});
  CHECK_FALSE(validate_instance(bad).empty());

  bad = m;
  bad.variables[0].ub = 2.0;
  CHECK_FALSE(validate_instance(bad).empty());

  bad = m;
  bad.constraints[0].lhs = 6.0;
  CHECK_FALSE(validate_instance(bad).empty());

  bad = m;
  bad.constraints[0].coeffs.clear();
  CHECK_FALSE(validate_instance(bad).empty());

  bad = m;
  bad.constraints[0].coeffs = {{0, 1.0}, {0, 2.0}};
  CHECK_FALSE(validate_instance(bad).empty());

  bad = m;
  bad.constraints[0].lhs = -kInf;
  bad.constraints[0].rhs = kInf;
  CHECK_FALSE(validate_instance(bad).empty());

  CHECK_THROWS_AS(canonicalize(bad), std::invalid_argument);
}

TEST_CASE("canonicalize negates a maximization objective") {
  auto m = small_max();
  auto cm = canonicalize(m);
  CHECK(cm.negated);
  CHECK(cm.instance.sense == Sense::Minimize);
  CHECK(cm.instance.objective[0].coef == -3.0);
  CHECK(cm.to_original(-7.0) == 7.0);

  m.sense = Sense::Minimize;
  auto cm2 = canonicalize(m);
  CHECK_FALSE(cm2.negated);
  CHECK(cm2.instance == m);
}

TEST_CASE("evaluate_solution reports objective and violations") {
  auto m = small_max();
  Eigen::VectorXd x(2);
  x << 1.0, 3.0;
  auto s = evaluate_solution(m, x);
  CHECK(s.feasible);
  CHECK(s.objective == doctest::Approx(6.0));

  x << 1.0, 3.5;
  s = evaluate_solution(m, x);
  CHECK_FALSE(s.feasible);
  CHECK(s.max_violation == doctest::Approx(0.5));

  x << 0.5, 0.0;
  CHECK_FALSE(evaluate_solution(m, x).feasible);

  x << 1.0 - 5e-7, 0.0;
  CHECK(evaluate_solution(m, x).feasible);

  CHECK_THROWS(evaluate_solution(m, Eigen::VectorXd::Zero(3)));
}

TEST_CASE("normalize_terms sorts merges and drops zeros") {
  std::vector<Term> t = {{3, 1.0}, {1, 2.0}, {3, -1.0}, {0, 0.0}, {1, 0.5}};
  normalize_terms(t);
  REQUIRE(t.size() == 1);
  CHECK(t[0].var == 1);
  CHECK(t[0].coef == 2.5);
}
