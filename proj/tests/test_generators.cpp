#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mipgcn/generators.hpp"

#include <set>

using namespace mipgcn;

namespace {

struct Expected {
  ProblemType problem;
  int vars_lo, vars_hi;
  int rows_lo, rows_hi;
};

// Small-scale problem statistics as published.
const Expected kSmall[] = {
    {ProblemType::GA, 1152, 1152, 108, 108},
    {ProblemType::MIS, 125, 125, 1734, 1929},
    {ProblemType::SC, 750, 750, 550, 550},
    {ProblemType::MK, 315, 350, 19, 21},
};

MipInstance gen(ProblemType p, const std::string& preset, std::uint64_t seed) {
  GenSpec s;
  s.problem = p;
  s.preset = preset;
  s.seed = seed;
  return generate(s);
}

}  // namespace

TEST_CASE("small presets stay inside the published count ranges") {
  for (const auto& e : kSmall)
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const MipInstance inst = gen(e.problem, "small", seed);
      CAPTURE(to_string(e.problem));
      CAPTURE(seed);
      CHECK(inst.num_vars() >= e.vars_lo);
      CHECK(inst.num_vars() <= e.vars_hi);
      CHECK(inst.num_rows() >= e.rows_lo);
      CHECK(inst.num_rows() <= e.rows_hi);
      CHECK(static_cast<int>(inst.binary_indices().size()) == inst.num_vars());
      CHECK(validate_instance(inst).empty());
    }
}

TEST_CASE("MK small dimensions and items vary across seeds") {
  std::set<int> items, dims;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const MipInstance inst = gen(ProblemType::MK, "small", seed);
    items.insert(inst.num_vars());
    dims.insert(inst.num_rows());
  }
  CHECK(items.size() > 1);
  CHECK(dims.size() > 1);
}

TEST_CASE("generation is byte-exact across reruns") {
  for (ProblemType p : kAllProblems)
    for (const char* preset : {"tiny", "tinyplus", "small"}) {
      CAPTURE(to_string(p));
      CAPTURE(preset);
      const std::string a = instance_to_json_text(gen(p, preset, 7));
      const std::string b = instance_to_json_text(gen(p, preset, 7));
      CHECK(a == b);
      CHECK(a != instance_to_json_text(gen(p, preset, 8)));
    }
}

TEST_CASE("preset metadata matches generated instances") {
  for (ProblemType p : kAllProblems)
    for (const auto& info : list_presets(p)) {
      if (info.name == "large") continue;
      for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const MipInstance inst = gen(p, info.name, seed);
        CAPTURE(to_string(p));
        CAPTURE(info.name);
        CHECK(info.variables.contains(inst.num_vars()));
        CHECK(info.constraints.contains(inst.num_rows()));
        CHECK(info.binaries.contains(static_cast<int>(inst.binary_indices().size())));
      }
    }
}

TEST_CASE("tiny presets stay within enumeration range") {
  for (ProblemType p : kAllProblems)
    for (std::uint64_t seed = 0; seed < 10; ++seed)
      CHECK(gen(p, "tiny", seed).binary_indices().size() <= 16);
}

TEST_CASE("custom params override the preset") {
  GenSpec s;
  s.problem = ProblemType::SC;
  s.preset = "tiny";
  s.params = {{"sets", 9}, {"elements", 5}};
  const MipInstance inst = generate(s);
  CHECK(inst.num_vars() == 9);
  CHECK(inst.num_rows() == 5);
  CHECK_THROWS(problem_from_string("nope"));
  CHECK(problem_from_string("sc") == ProblemType::SC);
}
