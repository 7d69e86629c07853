#include "mipgcn/labeler.hpp"

#include "mipgcn/simplex.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <stdexcept>

namespace mipgcn {

const char* to_string(Label l) {
  switch (l) {
    case Label::Stable0: return "stable0";
    case Label::Stable1: return "stable1";
    case Label::Unstable: return "unstable";
  }
  return "?";
}

Label label_from_string(const std::string& s) {
  if (s == "stable0") return Label::Stable0;
  if (s == "stable1") return Label::Stable1;
  if (s == "unstable") return Label::Unstable;
  throw ParseError("unknown label '" + s + "'");
}

Solution initial_solution(const MipInstance& inst, double base_time_limit_s, int max_doublings) {
  BnbConfig cfg;
  cfg.mode = SolveMode::FirstFeasible;
  cfg.time_limit_s = base_time_limit_s;
  for (int attempt = 0; attempt <= max_doublings; ++attempt) {
    const auto res = solve(inst, cfg);
    if (res.has_incumbent()) return *res.incumbent;
    if (res.status == SolveStatus::Infeasible) throw std::runtime_error(inst.name + ": instance is infeasible");
    if (res.status == SolveStatus::Unbounded) throw std::runtime_error(inst.name + ": relaxation is unbounded");
    cfg.time_limit_s *= 2.0;
  }
  throw std::runtime_error(inst.name + ": no feasible solution within the time budget");
}

MipInstance proximity_instance(const MipInstance& inst, const Solution& x_bar, double delta) {
  MipInstance aux = inst;
  aux.name = inst.name + "_proximity";
  aux.sense = Sense::Minimize;
  aux.objective.clear();
  // The constant |{j : x_bar_j = 1}| is dropped; it does not move the argmin.
  for (int j : inst.binary_indices())
    aux.objective.push_back({j, std::lround(x_bar.values[j]) == 1 ? -1.0 : 1.0});

  Constraint cut;
  cut.name = "proximity_cutoff";
  cut.coeffs = inst.objective;
  normalize_terms(cut.coeffs);
  if (inst.sense == Sense::Minimize) {
    cut.rhs = x_bar.objective - delta;
  } else {
    cut.lhs = x_bar.objective + delta;
  }
  aux.constraints.push_back(std::move(cut));
  return aux;
}

std::optional<Solution> proximity_step(const MipInstance& inst, const Solution& x_bar, double delta,
                                       double time_limit_s) {
  if (!(delta > 0.0)) throw std::invalid_argument("proximity step needs delta > 0");
  if (!evaluate_solution(inst, x_bar.values).feasible) throw std::invalid_argument("x_bar is not feasible");
  BnbConfig cfg;
  cfg.mode = SolveMode::FirstFeasible;
  cfg.time_limit_s = time_limit_s;
  cfg.start_hint.assign(x_bar.values.data(), x_bar.values.data() + x_bar.values.size());
  const auto res = solve(proximity_instance(inst, x_bar, delta), cfg);
  if (!res.has_incumbent()) return std::nullopt;
  Solution s = evaluate_solution(inst, res.incumbent->values);
  if (!s.feasible) return std::nullopt;
  // The cutoff row is only met to the feasibility tolerance; insist on the full step.
  const double gain = inst.sense == Sense::Minimize ? x_bar.objective - s.objective : s.objective - x_bar.objective;
  if (gain < delta * (1.0 - 1e-9)) return std::nullopt;
  return s;
}

std::vector<Label> stability_labels(const std::vector<int>& vars, const std::vector<Solution>& solutions) {
  if (solutions.empty()) throw std::invalid_argument("stability labels need at least one solution");
  std::vector<Label> out;
  out.reserve(vars.size());
  for (int j : vars) {
    const long first = std::lround(solutions.front().values[j]);
    bool stable = true;
    for (const auto& s : solutions)
      if (std::lround(s.values[j]) != first) {
        stable = false;
        break;
      }
    out.push_back(!stable ? Label::Unstable : first == 1 ? Label::Stable1 : Label::Stable0);
  }
  return out;
}

LabelSet generate_labels(const MipInstance& inst, const LabelConfig& cfg) {
  LabelSet out;
  out.vars = inst.binary_indices();
  if (cfg.mode == "optimal") {
    BnbConfig bc;
    bc.time_limit_s = cfg.base_time_limit_s;
    const auto res = solve(inst, bc);
    if (res.status != SolveStatus::Optimal) throw std::runtime_error(inst.name + ": optimal labels need a solved instance");
    out.solutions.push_back(*res.incumbent);
    out.iterations = 1;
    out.labels = stability_labels(out.vars, out.solutions);
    return out;
  }
  if (cfg.mode != "proximity") throw std::invalid_argument("unknown label mode '" + cfg.mode + "'");

  out.solutions.push_back(initial_solution(inst, cfg.base_time_limit_s, cfg.max_doublings));
  const auto canon = canonicalize(inst);
  const auto root = solve_lp(canon.instance);
  const double first_obj = out.solutions.front().objective;
  const double first_min = canon.negated ? -first_obj : first_obj;
  double delta = 0.0;
  if (root.status == LpStatus::Optimal) delta = 0.01 * (first_min - root.objective);
  out.delta = std::max(delta, 1e-6 * (1.0 + std::abs(first_obj)));

  while (static_cast<int>(out.solutions.size()) < cfg.max_iters) {
    auto next = proximity_step(inst, out.solutions.back(), out.delta, cfg.base_time_limit_s);
    if (!next) break;
    out.solutions.push_back(std::move(*next));
  }
  out.iterations = static_cast<int>(out.solutions.size());
  out.labels = stability_labels(out.vars, out.solutions);
  return out;
}

std::string labels_to_json_text(const MipInstance& inst, const LabelSet& labels) {
  nlohmann::ordered_json j;
  j["instance"] = inst.name;
  j["delta"] = labels.delta;
  j["iterations"] = labels.iterations;
  nlohmann::ordered_json lab = nlohmann::ordered_json::object();
  for (std::size_t k = 0; k < labels.vars.size(); ++k)
    lab[inst.variables[labels.vars[k]].name] = to_string(labels.labels[k]);
  j["labels"] = std::move(lab);
  nlohmann::ordered_json trace = nlohmann::ordered_json::array();
  for (const auto& s : labels.solutions) trace.push_back(s.objective);
  j["trace"] = std::move(trace);
  return j.dump(1) + "\n";
}

LabelFile label_file_from_json_text(const std::string& text) {
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("label file: ") + e.what());
  }
  LabelFile f;
  try {
    f.instance = j.at("instance").get<std::string>();
    f.delta = j.at("delta").get<double>();
    f.iterations = j.at("iterations").get<int>();
    for (const auto& [name, v] : j.at("labels").items()) f.labels.emplace_back(name, label_from_string(v.get<std::string>()));
    for (const auto& v : j.at("trace")) f.trace.push_back(v.get<double>());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("label file: ") + e.what());
  }
  return f;
}

}  // namespace mipgcn
