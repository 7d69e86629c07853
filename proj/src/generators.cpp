#include "mipgcn/generators.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>

namespace mipgcn {

const char* to_string(ProblemType p) {
  switch (p) {
    case ProblemType::FCNF: return "FCNF";
    case ProblemType::CFL: return "CFL";
    case ProblemType::GA: return "GA";
    case ProblemType::MIS: return "MIS";
    case ProblemType::MK: return "MK";
    case ProblemType::SC: return "SC";
    case ProblemType::TSP: return "TSP";
    case ProblemType::VRP: return "VRP";
  }
  return "?";
}

ProblemType problem_from_string(const std::string& s) {
  std::string up = s;
  std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return std::toupper(c); });
  for (auto p : kAllProblems)
    if (up == to_string(p)) return p;
  throw std::invalid_argument("unknown problem type '" + s + "'");
}

namespace {

using Rng = std::mt19937_64;

int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

int param_int(const GenParams& p, const char* key) {
  auto it = p.find(key);
  if (it == p.end()) throw std::invalid_argument(std::string("missing generator parameter '") + key + "'");
  const double v = it->second;
  if (v < 1.0 || v != std::floor(v))
    throw std::invalid_argument(std::string("generator parameter '") + key + "' must be an integer >= 1");
  return static_cast<int>(v);
}

double param_real(const GenParams& p, const char* key) {
  auto it = p.find(key);
  if (it == p.end()) throw std::invalid_argument(std::string("missing generator parameter '") + key + "'");
  return it->second;
}

double param_prob(const GenParams& p, const char* key) {
  const double v = param_real(p, key);
  if (v < 0.0 || v > 1.0)
    throw std::invalid_argument(std::string("generator parameter '") + key + "' must lie in [0,1]");
  return v;
}

std::string idx_name(const char* prefix, int a) { return std::string(prefix) + "_" + std::to_string(a); }
std::string idx_name(const char* prefix, int a, int b) {
  return std::string(prefix) + "_" + std::to_string(a) + "_" + std::to_string(b);
}

int add_var(MipInstance& inst, std::string name, VarType t, double lb, double ub) {
  inst.variables.push_back({std::move(name), t, lb, ub});
  return inst.num_vars() - 1;
}

void add_row(MipInstance& inst, std::string name, std::vector<Term> terms, double lhs, double rhs) {
  normalize_terms(terms);
  inst.constraints.push_back({std::move(name), std::move(terms), lhs, rhs});
}

int rounded_distance(const std::pair<double, double>& a, const std::pair<double, double>& b) {
  return static_cast<int>(std::lround(100.0 * std::hypot(a.first - b.first, a.second - b.second)));
}

// Each generator below follows one textbook formulation; coefficients are
// uniform integers in [1,100] unless noted.

MipInstance gen_fcnf(const GenParams& p, Rng& rng) {
  const int nodes = uniform_int(rng, param_int(p, "nodes_min"), param_int(p, "nodes_max"));
  if (nodes < 2) throw std::invalid_argument("FCNF needs at least 2 nodes");
  const long max_arcs = static_cast<long>(nodes) * (nodes - 1);
  const int arcs = static_cast<int>(std::clamp<long>(
      std::lround(nodes * param_real(p, "arcs_per_node")), nodes, max_arcs));

  // A random Hamiltonian cycle makes the digraph strongly connected, so any
  // balanced demand vector is routable along cycle arcs of full capacity.
  std::vector<int> perm(nodes);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::set<std::pair<int, int>> cycle, arc_set;
  for (int k = 0; k < nodes; ++k) {
    std::pair<int, int> a{perm[k], perm[(k + 1) % nodes]};
    cycle.insert(a);
    arc_set.insert(a);
  }
  while (static_cast<int>(arc_set.size()) < arcs) {
    const int u = uniform_int(rng, 0, nodes - 1), v = uniform_int(rng, 0, nodes - 1);
    if (u != v) arc_set.insert({u, v});
  }

  const int n_src = std::max(1, nodes / 4), n_snk = std::max(1, nodes / 4);
  std::vector<int> order(nodes);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<double> demand(nodes, 0.0);
  int total = 0;
  for (int k = 0; k < n_src; ++k) {
    const int s = uniform_int(rng, 1, 10);
    demand[order[k]] = -s;
    total += s;
  }
  // Spread the total supply over the sinks, each receiving at least one unit when possible.
  for (int unit = 0; unit < total; ++unit) {
    const int k = unit < n_snk ? unit : uniform_int(rng, 0, n_snk - 1);
    demand[order[n_src + k]] += 1.0;
  }

  MipInstance inst;
  inst.sense = Sense::Minimize;
  std::vector<std::pair<int, int>> arc_list(arc_set.begin(), arc_set.end());
  std::vector<int> yv, xv;
  for (auto [u, v] : arc_list) yv.push_back(add_var(inst, idx_name("y", u, v), VarType::Binary, 0, 1));
  for (auto [u, v] : arc_list) xv.push_back(add_var(inst, idx_name("x", u, v), VarType::Continuous, 0, kInf));
  for (std::size_t e = 0; e < arc_list.size(); ++e) {
    inst.objective.push_back({yv[e], 10.0 * uniform_int(rng, 1, 100)});
    inst.objective.push_back({xv[e], static_cast<double>(uniform_int(rng, 1, 100))});
  }
  // Flow balance: inflow - outflow = d_v.
  for (int v = 0; v < nodes; ++v) {
    std::vector<Term> terms;
    for (std::size_t e = 0; e < arc_list.size(); ++e) {
      if (arc_list[e].second == v) terms.push_back({xv[e], 1.0});
      if (arc_list[e].first == v) terms.push_back({xv[e], -1.0});
    }
    add_row(inst, idx_name("balance", v), std::move(terms), demand[v], demand[v]);
  }
  for (std::size_t e = 0; e < arc_list.size(); ++e) {
    const double cap = cycle.contains(arc_list[e])
                           ? total
                           : uniform_int(rng, std::max(1, (total + 3) / 4), std::max(1, total));
    add_row(inst, idx_name("cap", arc_list[e].first, arc_list[e].second),
            {{xv[e], 1.0}, {yv[e], -cap}}, -kInf, 0.0);
  }
  normalize_terms(inst.objective);
  return inst;
}

MipInstance gen_cfl(const GenParams& p, Rng& rng) {
  const int m = param_int(p, "facilities"), n = param_int(p, "customers");
  std::vector<double> d(n), w(m);
  for (auto& dj : d) dj = uniform_int(rng, 1, 100);
  for (auto& wi : w) wi = uniform_int(rng, 1, 100);
  const double total_demand = std::accumulate(d.begin(), d.end(), 0.0);
  const double wsum = std::accumulate(w.begin(), w.end(), 0.0);

  MipInstance inst;
  inst.sense = Sense::Minimize;
  std::vector<int> open(m);
  for (int i = 0; i < m; ++i) open[i] = add_var(inst, idx_name("open", i), VarType::Binary, 0, 1);
  std::vector<std::vector<int>> y(m, std::vector<int>(n));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) y[i][j] = add_var(inst, idx_name("y", i, j), VarType::Continuous, 0, kInf);
  for (int i = 0; i < m; ++i) inst.objective.push_back({open[i], 10.0 * uniform_int(rng, 1, 100)});
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) inst.objective.push_back({y[i][j], static_cast<double>(uniform_int(rng, 1, 100))});

  for (int j = 0; j < n; ++j) {
    std::vector<Term> terms;
    for (int i = 0; i < m; ++i) terms.push_back({y[i][j], 1.0});
    add_row(inst, idx_name("assign", j), std::move(terms), 1.0, 1.0);
  }
  for (int i = 0; i < m; ++i) {
    // Total capacity is about 1.5x total demand.
    const double cap = std::ceil(1.5 * total_demand * w[i] / wsum);
    std::vector<Term> terms;
    for (int j = 0; j < n; ++j) terms.push_back({y[i][j], d[j]});
    terms.push_back({open[i], -cap});
    add_row(inst, idx_name("cap", i), std::move(terms), -kInf, 0.0);
  }
  normalize_terms(inst.objective);
  return inst;
}

MipInstance gen_ga(const GenParams& p, Rng& rng) {
  const int m = param_int(p, "agents"), n = param_int(p, "tasks");
  std::vector<std::vector<int>> profit(m, std::vector<int>(n)), weight(m, std::vector<int>(n));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      profit[i][j] = uniform_int(rng, 1, 100);
      weight[i][j] = uniform_int(rng, 1, 100);
    }
  // A planned assignment certifies feasibility.
  std::vector<double> planned(m, 0.0);
  for (int j = 0; j < n; ++j) {
    const int i = uniform_int(rng, 0, m - 1);
    planned[i] += weight[i][j];
  }

  MipInstance inst;
  inst.sense = Sense::Maximize;
  std::vector<std::vector<int>> x(m, std::vector<int>(n));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      x[i][j] = add_var(inst, idx_name("x", i, j), VarType::Binary, 0, 1);
      inst.objective.push_back({x[i][j], static_cast<double>(profit[i][j])});
    }
  for (int i = 0; i < m; ++i) {
    double wsum = 0.0;
    std::vector<Term> terms;
    for (int j = 0; j < n; ++j) {
      terms.push_back({x[i][j], static_cast<double>(weight[i][j])});
      wsum += weight[i][j];
    }
    const double cap = std::max(planned[i], std::floor(0.8 * wsum / m));
    add_row(inst, idx_name("cap", i), std::move(terms), -kInf, cap);
  }
  for (int j = 0; j < n; ++j) {
    std::vector<Term> terms;
    for (int i = 0; i < m; ++i) terms.push_back({x[i][j], 1.0});
    add_row(inst, idx_name("assign", j), std::move(terms), 1.0, 1.0);
  }
  return inst;
}

MipInstance gen_mis(const GenParams& p, Rng& rng) {
  const int n = param_int(p, "nodes");
  const long max_edges = static_cast<long>(n) * (n - 1) / 2;
  const int emin = static_cast<int>(std::min<long>(param_int(p, "edges_min"), max_edges));
  const int emax = static_cast<int>(std::min<long>(param_int(p, "edges_max"), max_edges));
  const int edges = uniform_int(rng, emin, std::max(emin, emax));
  // Erdos-Renyi G(n, M): M distinct edges sampled uniformly.
  std::set<std::pair<int, int>> edge_set;
  while (static_cast<int>(edge_set.size()) < edges) {
    int u = uniform_int(rng, 0, n - 1), v = uniform_int(rng, 0, n - 1);
    if (u == v) continue;
    edge_set.insert({std::min(u, v), std::max(u, v)});
  }
  MipInstance inst;
  inst.sense = Sense::Maximize;
  for (int v = 0; v < n; ++v) {
    add_var(inst, idx_name("x", v), VarType::Binary, 0, 1);
    inst.objective.push_back({v, 1.0});
  }
  for (auto [u, v] : edge_set) add_row(inst, idx_name("edge", u, v), {{u, 1.0}, {v, 1.0}}, -kInf, 1.0);
  return inst;
}

MipInstance gen_mk(const GenParams& p, Rng& rng) {
  const int n = uniform_int(rng, param_int(p, "items_min"), param_int(p, "items_max"));
  const int m = uniform_int(rng, param_int(p, "dims_min"), param_int(p, "dims_max"));
  const double tightness = param_prob(p, "tightness");
  MipInstance inst;
  inst.sense = Sense::Maximize;
  for (int j = 0; j < n; ++j) {
    add_var(inst, idx_name("x", j), VarType::Binary, 0, 1);
    inst.objective.push_back({j, static_cast<double>(uniform_int(rng, 1, 100))});
  }
  for (int i = 0; i < m; ++i) {
    std::vector<Term> terms;
    double wsum = 0.0, wmax = 0.0;
    for (int j = 0; j < n; ++j) {
      const double w = uniform_int(rng, 1, 100);
      terms.push_back({j, w});
      wsum += w;
      wmax = std::max(wmax, w);
    }
    add_row(inst, idx_name("dim", i), std::move(terms), -kInf, std::max(wmax, std::floor(tightness * wsum)));
  }
  return inst;
}

MipInstance gen_sc(const GenParams& p, Rng& rng) {
  const int sets = param_int(p, "sets"), elements = param_int(p, "elements");
  const double density = param_prob(p, "density");
  MipInstance inst;
  inst.sense = Sense::Minimize;
  for (int j = 0; j < sets; ++j) {
    add_var(inst, idx_name("x", j), VarType::Binary, 0, 1);
    inst.objective.push_back({j, 1.0});
  }
  for (int e = 0; e < elements; ++e) {
    std::vector<Term> terms;
    for (int j = 0; j < sets; ++j)
      if (uniform01(rng) < density) terms.push_back({j, 1.0});
    // Every element must be coverable.
    if (terms.empty()) terms.push_back({uniform_int(rng, 0, sets - 1), 1.0});
    add_row(inst, idx_name("cover", e), std::move(terms), 1.0, kInf);
  }
  return inst;
}

MipInstance gen_tsp(const GenParams& p, Rng& rng) {
  const int n = uniform_int(rng, param_int(p, "cities_min"), param_int(p, "cities_max"));
  if (n < 3) throw std::invalid_argument("TSP needs at least 3 cities");
  std::vector<std::pair<double, double>> pos(n);
  for (auto& q : pos) q = {uniform01(rng), uniform01(rng)};

  MipInstance inst;
  inst.sense = Sense::Minimize;
  std::vector<std::vector<int>> x(n, std::vector<int>(n, -1));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      x[i][j] = add_var(inst, idx_name("x", i, j), VarType::Binary, 0, 1);
      inst.objective.push_back({x[i][j], static_cast<double>(rounded_distance(pos[i], pos[j]))});
    }
  // Order variables u_i for cities 2..n (index 1..n-1 here); city 0 is the origin.
  std::vector<int> u(n, -1);
  for (int i = 1; i < n; ++i) u[i] = add_var(inst, idx_name("u", i), VarType::Continuous, 0, n - 1);

  for (int j = 0; j < n; ++j) {
    std::vector<Term> terms;
    for (int i = 0; i < n; ++i)
      if (i != j) terms.push_back({x[i][j], 1.0});
    add_row(inst, idx_name("in", j), std::move(terms), 1.0, 1.0);
  }
  for (int i = 0; i < n; ++i) {
    std::vector<Term> terms;
    for (int j = 0; j < n; ++j)
      if (i != j) terms.push_back({x[i][j], 1.0});
    add_row(inst, idx_name("out", i), std::move(terms), 1.0, 1.0);
  }
  for (int i = 1; i < n; ++i)
    for (int j = 1; j < n; ++j) {
      if (i == j) continue;
      add_row(inst, idx_name("mtz", i, j), {{u[i], 1.0}, {u[j], -1.0}, {x[i][j], static_cast<double>(n)}},
              -kInf, n - 1);
    }
  normalize_terms(inst.objective);
  return inst;
}

MipInstance gen_vrp(const GenParams& p, Rng& rng) {
  const int n = param_int(p, "customers"), fleet = param_int(p, "vehicles");
  const int nodes = n + 2;  // 0 = depot start, n+1 = depot end
  std::vector<std::pair<double, double>> pos(nodes);
  for (int i = 0; i <= n; ++i) pos[i] = {uniform01(rng), uniform01(rng)};
  pos[n + 1] = pos[0];
  std::vector<double> q(nodes, 0.0);
  for (int j = 1; j <= n; ++j) q[j] = uniform_int(rng, 1, 10);
  // Capacity from a random partition of the customers into at most `fleet` routes.
  std::vector<double> load(fleet, 0.0);
  for (int j = 1; j <= n; ++j) load[uniform_int(rng, 0, fleet - 1)] += q[j];
  const double cap = std::max(1.0, *std::max_element(load.begin(), load.end()));

  MipInstance inst;
  inst.sense = Sense::Minimize;
  std::vector<std::vector<int>> x(nodes, std::vector<int>(nodes));
  for (int i = 0; i < nodes; ++i)
    for (int j = 0; j < nodes; ++j) {
      x[i][j] = add_var(inst, idx_name("x", i, j), VarType::Binary, 0, 1);
      inst.objective.push_back({x[i][j], static_cast<double>(rounded_distance(pos[i], pos[j]))});
    }
  std::vector<int> y(nodes);
  for (int i = 0; i < nodes; ++i) y[i] = add_var(inst, idx_name("y", i), VarType::Continuous, 0, cap);

  for (int i = 1; i <= n; ++i) {
    std::vector<Term> terms;
    for (int j = 1; j <= n + 1; ++j)
      if (j != i) terms.push_back({x[i][j], 1.0});
    add_row(inst, idx_name("out", i), std::move(terms), 1.0, 1.0);
  }
  for (int h = 1; h <= n; ++h) {
    std::vector<Term> terms;
    for (int i = 0; i <= n; ++i)
      if (i != h) terms.push_back({x[i][h], 1.0});
    for (int j = 1; j <= n + 1; ++j)
      if (j != h) terms.push_back({x[h][j], -1.0});
    add_row(inst, idx_name("flow", h), std::move(terms), 0.0, 0.0);
  }
  {
    std::vector<Term> terms;
    for (int j = 1; j <= n; ++j) terms.push_back({x[0][j], 1.0});
    add_row(inst, "fleet", std::move(terms), -kInf, fleet);
  }
  // y_j >= y_i + q_j x_ij - Q (1 - x_ij)  <=>  y_j - y_i - (q_j + Q) x_ij >= -Q
  for (int i = 0; i < nodes; ++i)
    for (int j = 0; j < nodes; ++j)
      add_row(inst, idx_name("load", i, j), {{y[j], 1.0}, {y[i], -1.0}, {x[i][j], -(q[j] + cap)}}, -cap, kInf);
  normalize_terms(inst.objective);
  return inst;
}

struct PresetDef {
  const char* name;
  GenParams params;
};

std::vector<PresetDef> preset_defs(ProblemType p) {
  switch (p) {
    case ProblemType::FCNF:
      return {{"tiny", {{"nodes_min", 5}, {"nodes_max", 5}, {"arcs_per_node", 1.6}}},
              {"tinyplus", {{"nodes_min", 8}, {"nodes_max", 8}, {"arcs_per_node", 3.75}}},
              {"small", {{"nodes_min", 145}, {"nodes_max", 213}, {"arcs_per_node", 6.0}}},
              {"large", {{"nodes_min", 203}, {"nodes_max", 294}, {"arcs_per_node", 6.0}}}};
    case ProblemType::CFL:
      return {{"tiny", {{"facilities", 4}, {"customers", 5}}},
              {"tinyplus", {{"facilities", 12}, {"customers", 15}}},
              {"small", {{"facilities", 12}, {"customers", 100}}},
              {"large", {{"facilities", 76}, {"customers", 380}}}};
    case ProblemType::GA:
      return {{"tiny", {{"agents", 2}, {"tasks", 8}}},
              {"tinyplus", {{"agents", 3}, {"tasks", 10}}},
              {"small", {{"agents", 12}, {"tasks", 96}}},
              {"large", {{"agents", 40}, {"tasks", 560}}}};
    case ProblemType::MIS:
      return {{"tiny", {{"nodes", 14}, {"edges_min", 18}, {"edges_max", 28}}},
              {"tinyplus", {{"nodes", 30}, {"edges_min", 60}, {"edges_max", 80}}},
              {"small", {{"nodes", 125}, {"edges_min", 1734}, {"edges_max", 1929}}},
              {"large", {{"nodes", 400}, {"edges_min", 19153}, {"edges_max", 19713}}}};
    case ProblemType::MK:
      return {{"tiny", {{"items_min", 8}, {"items_max", 8}, {"dims_min", 2}, {"dims_max", 2}, {"tightness", 0.25}}},
              {"tinyplus", {{"items_min", 30}, {"items_max", 30}, {"dims_min", 3}, {"dims_max", 3}, {"tightness", 0.25}}},
              {"small", {{"items_min", 315}, {"items_max", 350}, {"dims_min", 19}, {"dims_max", 21}, {"tightness", 0.25}}},
              {"large", {{"items_min", 765}, {"items_max", 842}, {"dims_min", 46}, {"dims_max", 51}, {"tightness", 0.25}}}};
    case ProblemType::SC:
      return {{"tiny", {{"sets", 16}, {"elements", 12}, {"density", 0.2}}},
              {"tinyplus", {{"sets", 30}, {"elements", 25}, {"density", 0.15}}},
              {"small", {{"sets", 750}, {"elements", 550}, {"density", 0.05}}},
              {"large", {{"sets", 4500}, {"elements", 3500}, {"density", 0.03}}}};
    case ProblemType::TSP:
      return {{"tiny", {{"cities_min", 4}, {"cities_max", 4}}},
              {"tinyplus", {{"cities_min", 6}, {"cities_max", 6}}},
              {"small", {{"cities_min", 36}, {"cities_max", 40}}},
              {"large", {{"cities_min", 133}, {"cities_max", 140}}}};
    case ProblemType::VRP:
      return {{"tiny", {{"customers", 2}, {"vehicles", 2}}},
              {"tinyplus", {{"customers", 4}, {"vehicles", 2}}},
              {"small", {{"customers", 12}, {"vehicles", 3}}},
              {"large", {{"customers", 40}, {"vehicles", 8}}}};
  }
  return {};
}

// Exact count ranges implied by the formulations for a parameter set.
PresetInfo describe(ProblemType p, std::string name, const GenParams& g) {
  PresetInfo info{std::move(name), g, {}, {}, {}};
  auto at = [&](const char* k) { return static_cast<int>(g.at(k)); };
  switch (p) {
    case ProblemType::FCNF: {
      auto arcs = [&](int v) {
        return static_cast<int>(std::clamp<long>(std::lround(v * g.at("arcs_per_node")), v, static_cast<long>(v) * (v - 1)));
      };
      const int lo = at("nodes_min"), hi = at("nodes_max");
      info.binaries = {arcs(lo), arcs(hi)};
      info.variables = {2 * arcs(lo), 2 * arcs(hi)};
      info.constraints = {lo + arcs(lo), hi + arcs(hi)};
      break;
    }
    case ProblemType::CFL: {
      const int m = at("facilities"), n = at("customers");
      info.binaries = {m, m};
      info.variables = {m + m * n, m + m * n};
      info.constraints = {m + n, m + n};
      break;
    }
    case ProblemType::GA: {
      const int m = at("agents"), n = at("tasks");
      info.binaries = info.variables = {m * n, m * n};
      info.constraints = {m + n, m + n};
      break;
    }
    case ProblemType::MIS: {
      const int n = at("nodes");
      info.binaries = info.variables = {n, n};
      info.constraints = {at("edges_min"), at("edges_max")};
      break;
    }
    case ProblemType::MK:
      info.binaries = info.variables = {at("items_min"), at("items_max")};
      info.constraints = {at("dims_min"), at("dims_max")};
      break;
    case ProblemType::SC:
      info.binaries = info.variables = {at("sets"), at("sets")};
      info.constraints = {at("elements"), at("elements")};
      break;
    case ProblemType::TSP: {
      const int lo = at("cities_min"), hi = at("cities_max");
      info.binaries = {lo * (lo - 1), hi * (hi - 1)};
      info.variables = {lo * (lo - 1) + lo - 1, hi * (hi - 1) + hi - 1};
      info.constraints = {2 * lo + (lo - 1) * (lo - 2), 2 * hi + (hi - 1) * (hi - 2)};
      break;
    }
    case ProblemType::VRP: {
      const int n = at("customers");
      info.binaries = {(n + 2) * (n + 2), (n + 2) * (n + 2)};
      info.variables = {(n + 2) * (n + 3), (n + 2) * (n + 3)};
      info.constraints = {2 * n + 1 + (n + 2) * (n + 2), 2 * n + 1 + (n + 2) * (n + 2)};
      break;
    }
  }
  return info;
}

}  // namespace

std::vector<PresetInfo> list_presets(ProblemType problem) {
  std::vector<PresetInfo> out;
  for (auto& def : preset_defs(problem)) out.push_back(describe(problem, def.name, def.params));
  return out;
}

GenParams resolve_params(const GenSpec& spec) {
  GenParams params;
  if (spec.preset != "custom") {
    bool found = false;
    for (auto& def : preset_defs(spec.problem))
      if (spec.preset == def.name) {
        params = def.params;
        found = true;
      }
    if (!found) throw std::invalid_argument("unknown preset '" + spec.preset + "'");
  }
  for (const auto& [k, v] : spec.params) params[k] = v;
  return params;
}

MipInstance generate(const GenSpec& spec) {
  const GenParams params = resolve_params(spec);
  // Mix the problem into the stream so equal seeds across problems differ.
  Rng rng(spec.seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(spec.problem) + 1);
  MipInstance inst;
  switch (spec.problem) {
    case ProblemType::FCNF: inst = gen_fcnf(params, rng); break;
    case ProblemType::CFL: inst = gen_cfl(params, rng); break;
    case ProblemType::GA: inst = gen_ga(params, rng); break;
    case ProblemType::MIS: inst = gen_mis(params, rng); break;
    case ProblemType::MK: inst = gen_mk(params, rng); break;
    case ProblemType::SC: inst = gen_sc(params, rng); break;
    case ProblemType::TSP: inst = gen_tsp(params, rng); break;
    case ProblemType::VRP: inst = gen_vrp(params, rng); break;
  }
  std::string lower = to_string(spec.problem);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  inst.name = lower + "_" + spec.preset + "_" + std::to_string(spec.seed);
  return inst;
}

}  // namespace mipgcn
