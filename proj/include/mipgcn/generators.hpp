#pragma once

#include "mipgcn/mip.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mipgcn {

enum class ProblemType { FCNF, CFL, GA, MIS, MK, SC, TSP, VRP };

inline constexpr ProblemType kAllProblems[] = {ProblemType::FCNF, ProblemType::CFL,
                                               ProblemType::GA,   ProblemType::MIS,
                                               ProblemType::MK,   ProblemType::SC,
                                               ProblemType::TSP,  ProblemType::VRP};

const char* to_string(ProblemType p);
/// Case-insensitive; throws std::invalid_argument on unknown names.
ProblemType problem_from_string(const std::string& s);

/// Size and distribution parameters. Which keys matter depends on the problem:
///   FCNF: nodes_min, nodes_max, arcs_per_node
///   CFL:  facilities, customers
///   GA:   agents, tasks
///   MIS:  nodes, edges_min, edges_max
///   MK:   items_min, items_max, dims_min, dims_max, tightness
///   SC:   sets, elements, density
///   TSP:  cities_min, cities_max
///   VRP:  customers, vehicles
using GenParams = std::map<std::string, double>;

struct GenSpec {
  ProblemType problem = ProblemType::SC;
  /// "tiny", "tinyplus", "small", "large" or "custom" (custom uses params only).
  std::string preset = "tiny";
  GenParams params;
  std::uint64_t seed = 0;
};

/// Inclusive count range; lo == hi for deterministic sizes.
struct CountRange {
  int lo = 0;
  int hi = 0;
  bool contains(int v) const { return lo <= v && v <= hi; }
};

struct PresetInfo {
  std::string name;
  GenParams params;
  CountRange variables;
  CountRange constraints;
  CountRange binaries;
};

std::vector<PresetInfo> list_presets(ProblemType problem);
/// Preset params merged with (and overridden by) spec.params.
GenParams resolve_params(const GenSpec& spec);

MipInstance generate(const GenSpec& spec);

}  // namespace mipgcn
