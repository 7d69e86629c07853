#include "mipgcn/mip.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

namespace mipgcn {

using json = nlohmann::ordered_json;

const char* to_string(VarType t) {
  switch (t) {
    case VarType::Binary: return "binary";
    case VarType::Integer: return "integer";
    case VarType::Continuous: return "continuous";
  }
  return "?";
}

const char* to_string(Sense s) { return s == Sense::Minimize ? "minimize" : "maximize"; }

Eigen::VectorXd MipInstance::objective_dense() const {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(num_vars());
  for (const auto& t : objective) c[t.var] += t.coef;
  return c;
}

std::vector<int> MipInstance::binary_indices() const {
  std::vector<int> out;
  for (int j = 0; j < num_vars(); ++j)
    if (variables[j].vtype == VarType::Binary) out.push_back(j);
  return out;
}

int MipInstance::find_variable(const std::string& var_name) const {
  for (int j = 0; j < num_vars(); ++j)
    if (variables[j].name == var_name) return j;
  return -1;
}

void normalize_terms(std::vector<Term>& terms) {
  std::sort(terms.begin(), terms.end(),
            [](const Term& a, const Term& b) { return a.var < b.var; });
  std::vector<Term> merged;
  merged.reserve(terms.size());
  for (const auto& t : terms) {
    if (!merged.empty() && merged.back().var == t.var)
      merged.back().coef += t.coef;
    else
      merged.push_back(t);
  }
  std::erase_if(merged, [](const Term& t) { return t.coef == 0.0; });
  terms = std::move(merged);
}

std::vector<std::string> validate_instance(const MipInstance& inst) {
  std::vector<std::string> issues;
  const int n = inst.num_vars();
  for (int j = 0; j < n; ++j) {
    const auto& v = inst.variables[j];
    if (std::isnan(v.lb) || std::isnan(v.ub) || v.lb > v.ub)
      issues.push_back("variable '" + v.name + "': lower bound exceeds upper bound");
    if (v.vtype == VarType::Binary && (v.lb < 0.0 || v.ub > 1.0))
      issues.push_back("variable '" + v.name + "': binary bound outside [0,1]");
  }
  for (const auto& t : inst.objective)
    if (t.var < 0 || t.var >= n)
      issues.push_back("objective: dangling index " + std::to_string(t.var));
  for (const auto& row : inst.constraints) {
    if (row.coeffs.empty()) issues.push_back("constraint '" + row.name + "': no coefficients");
    if (std::isnan(row.lhs) || std::isnan(row.rhs) || row.lhs > row.rhs)
      issues.push_back("constraint '" + row.name + "': lhs exceeds rhs");
    if (std::isinf(row.lhs) && std::isinf(row.rhs))
      issues.push_back("constraint '" + row.name + "': both sides infinite");
    std::set<int> seen;
    for (const auto& t : row.coeffs) {
      if (t.var < 0 || t.var >= n) {
        issues.push_back("constraint '" + row.name + "': dangling index " + std::to_string(t.var));
        continue;
      }
      if (!seen.insert(t.var).second)
        issues.push_back("constraint '" + row.name + "': duplicate entry for variable '" +
                         inst.variables[t.var].name + "'");
    }
  }
  return issues;
}

CanonicalMip canonicalize(const MipInstance& inst) {
  auto issues = validate_instance(inst);
  if (!issues.empty()) throw std::invalid_argument("invalid instance: " + issues.front());
  CanonicalMip out{inst, false};
  if (inst.sense == Sense::Maximize) {
    out.instance.sense = Sense::Minimize;
    for (auto& t : out.instance.objective) t.coef = -t.coef;
    out.negated = true;
  }
  return out;
}

Solution evaluate_solution(const MipInstance& inst, const Eigen::VectorXd& x) {
  if (x.size() != inst.num_vars())
    throw std::invalid_argument("solution dimension " + std::to_string(x.size()) +
                                " does not match " + std::to_string(inst.num_vars()) +
                                " variables");
  Solution s;
  s.values = x;
  s.objective = 0.0;
  for (const auto& t : inst.objective) s.objective += t.coef * x[t.var];

  double viol = 0.0;
  for (int j = 0; j < inst.num_vars(); ++j) {
    const auto& v = inst.variables[j];
    viol = std::max({viol, v.lb - x[j], x[j] - v.ub});
    if (v.is_integral()) viol = std::max(viol, std::abs(x[j] - std::round(x[j])));
  }
  for (const auto& row : inst.constraints) {
    double act = 0.0;
    for (const auto& t : row.coeffs) act += t.coef * x[t.var];
    viol = std::max({viol, row.lhs - act, act - row.rhs});
  }
  s.max_violation = std::max(0.0, viol);
  s.feasible = s.max_violation <= kFeasTol;
  return s;
}

// ---------------------------------------------------------------------------
// JSON format

namespace {

json bound_to_json(double v) {
  if (v == kInf) return "inf";
  if (v == -kInf) return "-inf";
  return v;
}

double bound_from_json(const json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
  }
  throw ParseError(where + ": expected a number, \"inf\" or \"-inf\"");
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& where) {
  if (!obj.is_object()) throw ParseError(where + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      throw ParseError(where + ": unknown key '" + key + "'");
  }
  for (const char* a : allowed)
    if (!obj.contains(a)) throw ParseError(where + ": missing key '" + std::string(a) + "'");
}

VarType vtype_from_string(const std::string& s, const std::string& where) {
  if (s == "binary") return VarType::Binary;
  if (s == "integer") return VarType::Integer;
  if (s == "continuous") return VarType::Continuous;
  throw ParseError(where + ".vtype: unknown variable type '" + s + "'");
}

std::vector<Term> terms_from_json(const json& obj, const std::unordered_map<std::string, int>& index,
                                  const std::string& where) {
  if (!obj.is_object()) throw ParseError(where + ": expected an object of coefficients");
  std::vector<Term> terms;
  for (const auto& [key, val] : obj.items()) {
    auto it = index.find(key);
    if (it == index.end()) throw ParseError(where + ": unknown variable '" + key + "'");
    if (!val.is_number()) throw ParseError(where + "." + key + ": coefficient must be a number");
    terms.push_back({it->second, val.get<double>()});
  }
  std::sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) { return a.var < b.var; });
  return terms;
}

}  // namespace

std::string instance_to_json_text(const MipInstance& inst) {
  json doc;
  doc["name"] = inst.name;
  doc["sense"] = to_string(inst.sense);
  json vars = json::array();
  for (const auto& v : inst.variables)
    vars.push_back({{"name", v.name}, {"vtype", to_string(v.vtype)},
                    {"lb", bound_to_json(v.lb)}, {"ub", bound_to_json(v.ub)}});
  doc["variables"] = std::move(vars);
  json rows = json::array();
  for (const auto& r : inst.constraints) {
    json coeffs = json::object();
    for (const auto& t : r.coeffs) coeffs[inst.variables[t.var].name] = t.coef;
    rows.push_back({{"name", r.name}, {"lhs", bound_to_json(r.lhs)},
                    {"rhs", bound_to_json(r.rhs)}, {"coeffs", std::move(coeffs)}});
  }
  doc["constraints"] = std::move(rows);
  json obj = json::object();
  for (const auto& t : inst.objective) obj[inst.variables[t.var].name] = t.coef;
  doc["objective"] = std::move(obj);
  return doc.dump(1) + "\n";
}

MipInstance instance_from_json_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
  check_keys(doc, {"name", "sense", "variables", "constraints", "objective"}, "instance");

  MipInstance inst;
  if (!doc["name"].is_string()) throw ParseError("instance.name: expected a string");
  inst.name = doc["name"].get<std::string>();
  const auto sense = doc["sense"].is_string() ? doc["sense"].get<std::string>() : "";
  if (sense == "minimize")
    inst.sense = Sense::Minimize;
  else if (sense == "maximize")
    inst.sense = Sense::Maximize;
  else
    throw ParseError("instance.sense: expected \"minimize\" or \"maximize\"");

  if (!doc["variables"].is_array()) throw ParseError("instance.variables: expected an array");
  std::unordered_map<std::string, int> index;
  int j = 0;
  for (const auto& jv : doc["variables"]) {
    const std::string where = "variables[" + std::to_string(j) + "]";
    check_keys(jv, {"name", "vtype", "lb", "ub"}, where);
    if (!jv["name"].is_string() || !jv["vtype"].is_string())
      throw ParseError(where + ": name and vtype must be strings");
    Variable v;
    v.name = jv["name"].get<std::string>();
    v.vtype = vtype_from_string(jv["vtype"].get<std::string>(), where);
    v.lb = bound_from_json(jv["lb"], where + ".lb");
    v.ub = bound_from_json(jv["ub"], where + ".ub");
    if (!index.emplace(v.name, j).second)
      throw ParseError(where + ".name: duplicate variable name '" + v.name + "'");
    inst.variables.push_back(std::move(v));
    ++j;
  }

  if (!doc["constraints"].is_array()) throw ParseError("instance.constraints: expected an array");
  int i = 0;
  for (const auto& jc : doc["constraints"]) {
    const std::string where = "constraints[" + std::to_string(i) + "]";
    check_keys(jc, {"name", "lhs", "rhs", "coeffs"}, where);
    if (!jc["name"].is_string()) throw ParseError(where + ".name: expected a string");
    Constraint c;
    c.name = jc["name"].get<std::string>();
    c.lhs = bound_from_json(jc["lhs"], where + ".lhs");
    c.rhs = bound_from_json(jc["rhs"], where + ".rhs");
    c.coeffs = terms_from_json(jc["coeffs"], index, where + ".coeffs");
    inst.constraints.push_back(std::move(c));
    ++i;
  }
  inst.objective = terms_from_json(doc["objective"], index, "instance.objective");
  return inst;
}

MipInstance read_instance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open instance file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return instance_from_json_text(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_instance(const MipInstance& inst, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write instance file " + path.string());
  out << instance_to_json_text(inst);
}

}  // namespace mipgcn
