#include "mipgcn/trigraph.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mipgcn {

namespace {

using json = nlohmann::ordered_json;

const std::array<const char*, kVarFeatures> kVarNames = {
    "is_binary", "is_integer", "obj", "obj_pos", "obj_neg", "nnz", "up_locks", "down_locks",
    "lp_value", "lp_frac_down", "lp_frac_up", "lp_is_fractional",
    "pc_up", "pc_down", "pc_ratio", "pc_sum", "pc_product", "lb", "ub", "reduced_cost",
    "deg_mean", "deg_stdev", "deg_min", "deg_max",
    "rhs_ratio_pos_max", "rhs_ratio_pos_min", "rhs_ratio_neg_max", "rhs_ratio_neg_min",
    "lhs_ratio_pos_max", "lhs_ratio_pos_min", "lhs_ratio_neg_max", "lhs_ratio_neg_min",
    "coef_pos_count", "coef_pos_mean", "coef_pos_stdev", "coef_pos_min", "coef_pos_max",
    "coef_neg_count", "coef_neg_mean", "coef_neg_stdev", "coef_neg_min", "coef_neg_max",
    "unit_sum", "unit_mean", "unit_stdev", "unit_max", "unit_min",
    "dual_sum", "dual_mean", "dual_stdev", "dual_max", "dual_min",
    "invsum_sum", "invsum_mean", "invsum_stdev", "invsum_max", "invsum_min",
};

const std::array<const char*, kConsFeatures> kConsNames = {
    "is_singleton", "is_aggregation", "is_precedence", "is_knapsack", "is_logicor", "is_general_linear",
    "is_and", "is_or", "is_xor", "is_linking", "is_cardinality", "is_variable_bound",
    "lhs", "rhs", "nnz", "nnz_pos", "nnz_neg",
    "dual", "basis_status",
    "abs_sum", "pos_sum", "neg_sum",
    "coef_mean", "coef_stdev", "coef_min", "coef_max",
};

struct Stats {
  double count = 0, sum = 0, mean = 0, stdev = 0, min = 0, max = 0;
};

Stats stats_of(const std::vector<double>& v) {
  Stats s;
  if (v.empty()) return s;
  s.count = static_cast<double>(v.size());
  s.min = v.front();
  s.max = v.front();
  for (double x : v) {
    s.sum += x;
    s.min = std::min(s.min, x);
    s.max = std::max(s.max, x);
  }
  s.mean = s.sum / s.count;
  double ss = 0.0;
  for (double x : v) ss += (x - s.mean) * (x - s.mean);
  s.stdev = std::sqrt(ss / s.count);
  return s;
}

double side(double v) { return std::clamp(v, -kInfSentinel, kInfSentinel); }

// Column lists and per-row aggregates shared by all feature extractors.
struct Context {
  const RootInfo& root;
  const MipInstance& inst;
  std::vector<std::vector<std::pair<int, double>>> columns;
  std::vector<double> row_sum, row_max_abs;

  explicit Context(const RootInfo& r) : root(r), inst(r.presolved) {
    columns.resize(inst.num_vars());
    row_sum.assign(inst.num_rows(), 0.0);
    row_max_abs.assign(inst.num_rows(), 0.0);
    for (int i = 0; i < inst.num_rows(); ++i)
      for (const auto& t : inst.constraints[i].coeffs) {
        columns[t.var].push_back({i, t.coef});
        row_sum[i] += t.coef;
        row_max_abs[i] = std::max(row_max_abs[i], std::abs(t.coef));
      }
  }

  Eigen::VectorXd variable(int j) const {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(kVarFeatures);
    const auto& v = inst.variables[j];
    const auto& col = columns[j];
    double c = 0.0;
    for (const auto& t : inst.objective)
      if (t.var == j) c += t.coef;

    f[0] = v.vtype == VarType::Binary;
    f[1] = v.vtype == VarType::Integer;
    f[2] = c;
    f[3] = std::max(c, 0.0);
    f[4] = std::min(c, 0.0);
    f[5] = static_cast<double>(col.size());
    f[6] = root.up_locks[j];
    f[7] = root.down_locks[j];

    const double x = root.lp.x[j];
    f[8] = x;
    f[9] = x - std::floor(x);
    f[10] = std::ceil(x) - x;
    f[11] = std::min(f[9], f[10]) > kIntTol;
    const auto [pu, pd] = root.pseudocosts[j];
    f[12] = pu;
    f[13] = pd;
    f[14] = pd != 0.0 ? pu / pd : 0.0;
    f[15] = pu + pd;
    f[16] = pu * pd;
    f[17] = side(v.lb);
    f[18] = side(v.ub);
    f[19] = root.lp.reduced_costs[j];

    std::vector<double> deg, pos, neg, unit, dual, invsum;
    std::vector<double> ratios[2][2];  // [rhs, lhs][positive, negative]
    for (const auto& [i, a] : col) {
      const auto& row = inst.constraints[i];
      deg.push_back(static_cast<double>(row.coeffs.size()));
      (a > 0 ? pos : neg).push_back(a);
      unit.push_back(a);
      dual.push_back(root.lp.duals[i] * a);
      invsum.push_back(row_sum[i] != 0.0 ? a / row_sum[i] : 0.0);
      const double sides[2] = {row.rhs, row.lhs};
      for (int s = 0; s < 2; ++s)
        if (std::isfinite(sides[s]) && sides[s] != 0.0) {
          const double r = a / sides[s];
          ratios[s][r > 0 ? 0 : 1].push_back(r);
        }
    }
    const Stats d = stats_of(deg);
    f[20] = d.mean;
    f[21] = d.stdev;
    f[22] = d.min;
    f[23] = d.max;
    int k = 24;
    for (auto& by_side : ratios)
      for (auto& group : by_side) {
        const Stats r = stats_of(group);
        f[k++] = r.max;
        f[k++] = r.min;
      }
    for (const auto* group : {&pos, &neg}) {
      const Stats s = stats_of(*group);
      f[k++] = s.count;
      f[k++] = s.mean;
      f[k++] = s.stdev;
      f[k++] = s.min;
      f[k++] = s.max;
    }
    for (const auto* group : {&unit, &dual, &invsum}) {
      const Stats s = stats_of(*group);
      f[k++] = s.sum;
      f[k++] = s.mean;
      f[k++] = s.stdev;
      f[k++] = s.max;
      f[k++] = s.min;
    }
    return f;
  }

  Eigen::VectorXd constraint(int i) const {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(kConsFeatures);
    const auto& row = inst.constraints[i];
    f[static_cast<int>(classify_row(inst, row))] = 1.0;
    f[12] = side(row.lhs);
    f[13] = side(row.rhs);
    std::vector<double> coefs;
    double pos = 0.0, neg = 0.0;
    for (const auto& t : row.coeffs) {
      coefs.push_back(t.coef);
      if (t.coef > 0) {
        f[15] += 1;
        pos += t.coef;
      } else if (t.coef < 0) {
        f[16] += 1;
        neg -= t.coef;
      }
    }
    f[14] = static_cast<double>(row.coeffs.size());
    f[17] = root.lp.duals[i];
    switch (root.lp.row_basis[i]) {
      case BasisStatus::Basic: f[18] = 0.0; break;
      case BasisStatus::AtLower: f[18] = -1.0; break;
      case BasisStatus::AtUpper: f[18] = 1.0; break;
    }
    f[19] = pos + neg;
    f[20] = pos;
    f[21] = neg;
    const Stats s = stats_of(coefs);
    f[22] = s.mean;
    f[23] = s.stdev;
    f[24] = s.min;
    f[25] = s.max;
    return f;
  }
};

json matrix_row(const Eigen::MatrixXd& m, int r) {
  json a = json::array();
  for (int c = 0; c < m.cols(); ++c) a.push_back(m(r, c));
  return a;
}

json vector_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (double x : v) a.push_back(x);
  return a;
}

Eigen::VectorXd vector_from(const json& a, int expected, const char* what) {
  if (!a.is_array() || static_cast<int>(a.size()) != expected)
    throw ParseError(std::string(what) + ": expected " + std::to_string(expected) + " values");
  Eigen::VectorXd v(expected);
  for (int k = 0; k < expected; ++k) v[k] = a[k].get<double>();
  return v;
}

Standardizer fit_columns(const std::vector<const Eigen::MatrixXd*>& blocks, int dim) {
  Standardizer s;
  s.shift = Eigen::VectorXd::Zero(dim);
  s.scale = Eigen::VectorXd::Ones(dim);
  long n = 0;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(dim);
  for (const auto* b : blocks) {
    sum += b->colwise().sum().transpose();
    n += b->rows();
  }
  if (n == 0) return s;
  const Eigen::VectorXd mean = sum / static_cast<double>(n);
  Eigen::VectorXd ss = Eigen::VectorXd::Zero(dim);
  for (const auto* b : blocks) ss += (b->rowwise() - mean.transpose()).colwise().squaredNorm().transpose();
  for (int k = 0; k < dim; ++k) {
    const double sd = std::sqrt(ss[k] / static_cast<double>(n));
    s.shift[k] = mean[k];
    if (sd > 1e-12 * (1.0 + std::abs(mean[k]))) s.scale[k] = sd;
  }
  return s;
}

json standardizer_json(const Standardizer& s) {
  json j;
  j["shift"] = vector_json(s.shift);
  j["scale"] = vector_json(s.scale);
  return j;
}

Standardizer standardizer_from(const json& j, int dim, const char* what) {
  Standardizer s;
  s.shift = vector_from(j.at("shift"), dim, what);
  s.scale = vector_from(j.at("scale"), dim, what);
  if ((s.scale.array() <= 0.0).any()) throw ParseError(std::string(what) + ": scale must be positive");
  return s;
}

}  // namespace

const std::array<const char*, kVarFeatures>& variable_feature_names() { return kVarNames; }
const std::array<const char*, kConsFeatures>& constraint_feature_names() { return kConsNames; }

std::vector<std::vector<int>> TriGraph::var_adjacency() const {
  std::vector<std::vector<int>> adj(num_vars());
  for (int e = 0; e < static_cast<int>(vc_edges.size()); ++e) adj[vc_edges[e].var].push_back(e);
  return adj;
}

std::vector<std::vector<int>> TriGraph::cons_adjacency() const {
  std::vector<std::vector<int>> adj(num_cons());
  for (int e = 0; e < static_cast<int>(vc_edges.size()); ++e) adj[vc_edges[e].cons].push_back(e);
  return adj;
}

RowType classify_row(const MipInstance& inst, const Constraint& row) {
  const auto n = row.coeffs.size();
  if (n == 1) return RowType::Singleton;
  int continuous = 0;
  bool all_binary = true, all_positive = true, all_one = true;
  for (const auto& t : row.coeffs) {
    const auto vt = inst.variables[t.var].vtype;
    continuous += vt == VarType::Continuous;
    all_binary = all_binary && vt == VarType::Binary;
    all_positive = all_positive && t.coef > 0;
    all_one = all_one && t.coef == 1.0;
  }
  if (n == 2 && continuous == 1) return RowType::VariableBound;
  if (all_binary && all_one && row.lhs == 1.0 && std::isinf(row.rhs)) return RowType::Logicor;
  if (all_binary && all_positive && std::isfinite(row.rhs) && std::isinf(row.lhs)) return RowType::Knapsack;
  return RowType::GeneralLinear;
}

Eigen::VectorXd variable_features(const RootInfo& root, int j) { return Context(root).variable(j); }
Eigen::VectorXd constraint_features(const RootInfo& root, int i) { return Context(root).constraint(i); }

TriGraph build_trigraph(const RootInfo& root) {
  if (root.lp.status != LpStatus::Optimal) throw std::runtime_error("trigraph needs an optimal root LP");
  const Context ctx(root);
  const auto& inst = root.presolved;
  TriGraph g;
  g.instance = inst.name;

  std::vector<int> node_of(inst.num_vars(), -1);
  const auto bins = inst.binary_indices();
  g.var_features.resize(static_cast<Eigen::Index>(bins.size()), kVarFeatures);
  g.vo_features.resize(static_cast<Eigen::Index>(bins.size()), kEdgeFeatures);
  double c_max = 0.0;
  Eigen::VectorXd c = inst.objective_dense();
  for (int j = 0; j < inst.num_vars(); ++j) c_max = std::max(c_max, std::abs(c[j]));
  double c_l1 = 0.0;
  for (std::size_t k = 0; k < bins.size(); ++k) {
    const int j = bins[k];
    node_of[j] = static_cast<int>(k);
    g.var_names.push_back(inst.variables[j].name);
    g.var_features.row(static_cast<Eigen::Index>(k)) = ctx.variable(j).transpose();
    g.vo_features(static_cast<Eigen::Index>(k), 0) = c[j];
    g.vo_features(static_cast<Eigen::Index>(k), 1) = c_max > 0 ? c[j] / c_max : 0.0;
    c_l1 += std::abs(c[j]);
  }
  g.obj_features << c_l1, static_cast<double>(bins.size());

  g.cons_features.resize(inst.num_rows(), kConsFeatures);
  g.co_features.resize(inst.num_rows(), kEdgeFeatures);
  for (int i = 0; i < inst.num_rows(); ++i) {
    const auto& row = inst.constraints[i];
    g.cons_names.push_back(row.name);
    g.cons_features.row(i) = ctx.constraint(i).transpose();
    const double b = side(std::isfinite(row.rhs) ? row.rhs : row.lhs);
    const double amax = ctx.row_max_abs[i];
    g.co_features(i, 0) = b;
    g.co_features(i, 1) = amax > 0 ? b / amax : 0.0;
    for (const auto& t : row.coeffs) {
      if (node_of[t.var] < 0) continue;
      VcEdge e;
      e.var = node_of[t.var];
      e.cons = i;
      e.features << t.coef, t.coef / amax;
      g.vc_edges.push_back(e);
    }
  }
  return g;
}

TriGraph build_trigraph(const MipInstance& inst) { return build_trigraph(collect_root_info(inst)); }

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& m) const {
  if (m.cols() != shift.size()) throw std::invalid_argument("scaler dimension mismatch");
  return (m.rowwise() - shift.transpose()).array().rowwise() / scale.transpose().array();
}

FeatureScaler fit_scaler(const std::vector<TriGraph>& graphs) {
  if (graphs.empty()) throw std::invalid_argument("scaler needs at least one training graph");
  std::vector<const Eigen::MatrixXd*> var, cons, vo, co;
  std::vector<Eigen::MatrixXd> obj_rows, vc_blocks;
  for (const auto& g : graphs) {
    var.push_back(&g.var_features);
    cons.push_back(&g.cons_features);
    vo.push_back(&g.vo_features);
    co.push_back(&g.co_features);
    obj_rows.push_back(g.obj_features.transpose());
    Eigen::MatrixXd vc(static_cast<Eigen::Index>(g.vc_edges.size()), kEdgeFeatures);
    for (std::size_t e = 0; e < g.vc_edges.size(); ++e) vc.row(static_cast<Eigen::Index>(e)) = g.vc_edges[e].features.transpose();
    vc_blocks.push_back(std::move(vc));
  }
  std::vector<const Eigen::MatrixXd*> obj, vc;
  for (const auto& m : obj_rows) obj.push_back(&m);
  for (const auto& m : vc_blocks) vc.push_back(&m);
  FeatureScaler s;
  s.var = fit_columns(var, kVarFeatures);
  s.cons = fit_columns(cons, kConsFeatures);
  s.obj = fit_columns(obj, kObjFeatures);
  s.vc = fit_columns(vc, kEdgeFeatures);
  s.vo = fit_columns(vo, kEdgeFeatures);
  s.co = fit_columns(co, kEdgeFeatures);
  return s;
}

TriGraph apply_scaler(const TriGraph& g, const FeatureScaler& s) {
  TriGraph out = g;
  out.var_features = s.var.apply(g.var_features);
  out.cons_features = s.cons.apply(g.cons_features);
  out.obj_features = s.obj.apply(g.obj_features.transpose()).transpose();
  out.vo_features = s.vo.apply(g.vo_features);
  out.co_features = s.co.apply(g.co_features);
  for (auto& e : out.vc_edges) e.features = s.vc.apply(e.features.transpose()).transpose();
  return out;
}

std::string graph_to_json_text(const TriGraph& g) {
  json j;
  j["instance"] = g.instance;
  json vars = json::array();
  for (int k = 0; k < g.num_vars(); ++k) vars.push_back({{"name", g.var_names[k]}, {"features", matrix_row(g.var_features, k)}});
  j["var_nodes"] = std::move(vars);
  json cons = json::array();
  for (int i = 0; i < g.num_cons(); ++i) cons.push_back({{"name", g.cons_names[i]}, {"features", matrix_row(g.cons_features, i)}});
  j["cons_nodes"] = std::move(cons);
  j["obj_features"] = vector_json(g.obj_features);
  json edges = json::array();
  for (const auto& e : g.vc_edges)
    edges.push_back({{"type", "vc"}, {"from", e.var}, {"to", e.cons}, {"features", vector_json(e.features)}});
  for (int k = 0; k < g.num_vars(); ++k)
    edges.push_back({{"type", "vo"}, {"from", k}, {"to", 0}, {"features", matrix_row(g.vo_features, k)}});
  for (int i = 0; i < g.num_cons(); ++i)
    edges.push_back({{"type", "co"}, {"from", i}, {"to", 0}, {"features", matrix_row(g.co_features, i)}});
  j["edges"] = std::move(edges);
  return j.dump() + "\n";
}

TriGraph graph_from_json_text(const std::string& text) {
  TriGraph g;
  try {
    const json j = json::parse(text);
    g.instance = j.at("instance").get<std::string>();
    const auto& vars = j.at("var_nodes");
    const auto& cons = j.at("cons_nodes");
    const auto nv = static_cast<Eigen::Index>(vars.size()), nc = static_cast<Eigen::Index>(cons.size());
    g.var_features.resize(nv, kVarFeatures);
    g.cons_features.resize(nc, kConsFeatures);
    for (Eigen::Index k = 0; k < nv; ++k) {
      g.var_names.push_back(vars[k].at("name").get<std::string>());
      g.var_features.row(k) = vector_from(vars[k].at("features"), kVarFeatures, "var_nodes").transpose();
    }
    for (Eigen::Index i = 0; i < nc; ++i) {
      g.cons_names.push_back(cons[i].at("name").get<std::string>());
      g.cons_features.row(i) = vector_from(cons[i].at("features"), kConsFeatures, "cons_nodes").transpose();
    }
    g.obj_features = vector_from(j.at("obj_features"), kObjFeatures, "obj_features");
    g.vo_features = Eigen::MatrixXd::Zero(nv, kEdgeFeatures);
    g.co_features = Eigen::MatrixXd::Zero(nc, kEdgeFeatures);
    std::vector<char> vo_seen(nv, 0), co_seen(nc, 0);
    for (const auto& e : j.at("edges")) {
      const auto type = e.at("type").get<std::string>();
      const int from = e.at("from").get<int>(), to = e.at("to").get<int>();
      const Eigen::VectorXd f = vector_from(e.at("features"), kEdgeFeatures, "edges");
      if (type == "vc") {
        if (from < 0 || from >= nv || to < 0 || to >= nc) throw ParseError("vc edge out of range");
        g.vc_edges.push_back({from, to, f});
      } else if (type == "vo") {
        if (from < 0 || from >= nv || vo_seen[from]++) throw ParseError("bad vo edge");
        g.vo_features.row(from) = f.transpose();
      } else if (type == "co") {
        if (from < 0 || from >= nc || co_seen[from]++) throw ParseError("bad co edge");
        g.co_features.row(from) = f.transpose();
      } else {
        throw ParseError("unknown edge type '" + type + "'");
      }
    }
    if (std::count(vo_seen.begin(), vo_seen.end(), 1) != nv || std::count(co_seen.begin(), co_seen.end(), 1) != nc)
      throw ParseError("every node needs exactly one objective edge");
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("graph file: ") + e.what());
  }
  return g;
}

std::string scaler_to_json_text(const FeatureScaler& s) {
  json j;
  j["var"] = standardizer_json(s.var);
  j["cons"] = standardizer_json(s.cons);
  j["obj"] = standardizer_json(s.obj);
  j["vc"] = standardizer_json(s.vc);
  j["vo"] = standardizer_json(s.vo);
  j["co"] = standardizer_json(s.co);
  return j.dump(1) + "\n";
}

FeatureScaler scaler_from_json_text(const std::string& text) {
  FeatureScaler s;
  try {
    const json j = json::parse(text);
    s.var = standardizer_from(j.at("var"), kVarFeatures, "var");
    s.cons = standardizer_from(j.at("cons"), kConsFeatures, "cons");
    s.obj = standardizer_from(j.at("obj"), kObjFeatures, "obj");
    s.vc = standardizer_from(j.at("vc"), kEdgeFeatures, "vc");
    s.vo = standardizer_from(j.at("vo"), kEdgeFeatures, "vo");
    s.co = standardizer_from(j.at("co"), kEdgeFeatures, "co");
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("scaler file: ") + e.what());
  }
  return s;
}

}  // namespace mipgcn
