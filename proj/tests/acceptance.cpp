// Runs the twelve acceptance criteria and prints one PASS/FAIL line each.
// Arguments select criteria by number; no arguments runs all of them.

#include "metric_oracle.hpp"
#include "mipgcn/bnb.hpp"
#include "mipgcn/gcn.hpp"
#include "mipgcn/generators.hpp"
#include "mipgcn/labeler.hpp"
#include "mipgcn/metrics.hpp"
#include "mipgcn/pipeline.hpp"
#include "mipgcn/predictor.hpp"
#include "mipgcn/simplex.hpp"
#include "mipgcn/trigraph.hpp"
#include "test_support.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

using namespace mipgcn;
namespace oracle = mipgcn::testing;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double kObjTol = 1e-6;     // objectives, relative to 1 + |reference|
constexpr double kDualTol = 1e-6;    // strong duality, relative to 1 + |primal|
constexpr double kGradTol = 1e-4;    // finite-difference relative error
constexpr double kGradStep = 1e-4;
constexpr double kEquivTol = 1e-9;   // permutation equivariance, max abs difference
constexpr double kMetricTol = 1e-12;

struct Outcome {
  bool pass = false;
  std::string detail;
};

bool close(double a, double b) { return std::abs(a - b) <= kObjTol * (1 + std::abs(b)); }

class Timer {
 public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "mipgcn_acceptance" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// The 400 tiny instances shared by the first two criteria, with plain-solve results.
struct TinyCase {
  MipInstance inst;
  SolveResult plain;
};

const std::vector<TinyCase>& tiny_cases() {
  static const std::vector<TinyCase> cases = [] {
    std::vector<TinyCase> out;
    for (ProblemType p : kAllProblems)
      for (std::uint64_t seed = 0; seed < 50; ++seed) {
        TinyCase c;
        c.inst = generate({p, "tiny", {}, seed});
        c.plain = solve(c.inst, {});
        out.push_back(std::move(c));
      }
    return out;
  }();
  return cases;
}

Outcome ac1_solver_oracle() {
  Timer t;
  const auto& cases = tiny_cases();
  int bad = 0, feasible = 0, max_bin = 0;
  for (const auto& c : cases) {
    max_bin = std::max(max_bin, static_cast<int>(c.inst.binary_indices().size()));
    const auto ref = oracle::brute_force_optimum(c.inst);
    const bool ok = ref.feasible ? c.plain.status == SolveStatus::Optimal && c.plain.has_incumbent() &&
                                       close(c.plain.incumbent->objective, ref.objective)
                                 : c.plain.status == SolveStatus::Infeasible;
    if (!ok) {
      ++bad;
      fmt::print(stderr, "  AC1 mismatch on {}\n", c.inst.name);
    }
    feasible += ref.feasible;
  }
  const double secs = t.seconds();
  return {bad == 0 && max_bin <= 16,
          fmt::format("{} instances ({} feasible, <= {} binaries), {} mismatches, {:.1f} s", cases.size(), feasible,
                      max_bin, bad, secs)};
}

Outcome ac2_root_branching() {
  const auto& cases = tiny_cases();
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick_eta(0, kEtaGrid.size() - 1);
  int bad = 0, runs = 0;
  for (const auto& c : cases) {
    std::vector<std::string> names;
    for (int j : c.inst.binary_indices()) names.push_back(c.inst.variables[j].name);
    Eigen::VectorXd z(static_cast<Eigen::Index>(names.size()));
    for (Eigen::Index k = 0; k < z.size(); ++k) z[k] = u(rng);
    const LocalBranchingSet ref = reference_set(c.inst, names, z, kEtaGrid[pick_eta(rng)]);
    for (int phi : {0, 1, 2}) {
      ++runs;
      const SolveResult r = root_branch_solve(c.inst, ref, phi, {});
      bool ok = r.has_incumbent() == c.plain.has_incumbent();
      if (ok && r.has_incumbent())
        ok = r.status == SolveStatus::Optimal && close(r.incumbent->objective, c.plain.incumbent->objective);
      if (!ok) {
        ++bad;
        fmt::print(stderr, "  AC2 mismatch on {} phi={}\n", c.inst.name, phi);
      }
    }
  }
  return {bad == 0, fmt::format("{} root-branched solves, {} mismatches", runs, bad)};
}

Outcome ac3_phi_zero_fixing() {
  struct Source {
    ProblemType p;
    GenParams params;
  };
  const Source sources[] = {
      {ProblemType::SC, {{"sets", 12}, {"elements", 9}}},
      {ProblemType::MIS, {{"nodes", 12}, {"edges_min", 14}, {"edges_max", 20}}},
      {ProblemType::MK, {{"items_min", 12}, {"items_max", 12}}},
      {ProblemType::GA, {{"agents", 2}, {"tasks", 6}}},
  };
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int bad = 0, nonempty = 0, too_big = 0;
  for (int draw = 0; draw < 100; ++draw) {
    const Source& src = sources[draw % 4];
    const MipInstance inst = generate({src.p, "tiny", src.params, static_cast<std::uint64_t>(draw)});
    const auto bins = inst.binary_indices();
    if (bins.size() > 12 || static_cast<int>(bins.size()) != inst.num_vars()) {
      ++too_big;
      continue;
    }
    LocalBranchingSet s;
    const double frac = u(rng);
    for (int j : bins)
      if (u(rng) < frac) {
        s.indices.push_back(j);
        s.values.push_back(u(rng) < 0.5 ? 1 : 0);
      }
    const auto cut = oracle::feasible_binary_points(apply_local_branching_cut(inst, s, 0));
    std::vector<std::uint32_t> fixed;
    for (std::uint32_t mask : oracle::feasible_binary_points(inst)) {
      bool match = true;
      for (std::size_t k = 0; k < s.indices.size(); ++k)
        match = match && static_cast<int>((mask >> s.indices[k]) & 1u) == s.values[k];
      if (match) fixed.push_back(mask);
    }
    if (cut != fixed) ++bad;
    nonempty += !fixed.empty();
  }
  return {bad == 0 && too_big == 0,
          fmt::format("100 draws ({} with a nonempty fixed set), {} feasible-set mismatches", nonempty, bad)};
}

Outcome ac4_strong_duality() {
  int optimal = 0, bad = 0;
  double worst = 0.0;
  for (ProblemType p : kAllProblems)
    for (const char* preset : {"tiny", "tinyplus"})
      for (std::uint64_t seed = 0; seed < 25; ++seed) {
        MipInstance inst = canonicalize(generate({p, preset, {}, seed})).instance;
        for (auto& v : inst.variables) v.vtype = VarType::Continuous;
        const LpSolution lp = solve_lp(inst);
        if (lp.status != LpStatus::Optimal) continue;
        ++optimal;
        double dual = 0.0;
        for (int i = 0; i < inst.num_rows(); ++i) {
          const double y = lp.duals[i];
          if (y > 0) dual += y * inst.constraints[i].lhs;
          else if (y < 0) dual += y * inst.constraints[i].rhs;
        }
        for (int j = 0; j < inst.num_vars(); ++j) {
          const double d = lp.reduced_costs[j];
          if (d > 0) dual += d * inst.variables[j].lb;
          else if (d < 0) dual += d * inst.variables[j].ub;
        }
        const double err = std::abs(lp.objective - dual) / (1 + std::abs(lp.objective));
        if (!(err <= kDualTol)) ++bad;
        worst = std::max(worst, std::isfinite(err) ? err : 1.0);
      }
  return {bad == 0 && optimal > 0,
          fmt::format("{} optimal LPs, {} violations, worst relative gap {:.2e}", optimal, bad, worst)};
}

Outcome ac5_proximity_labeling() {
  Timer t;
  int traces = 0, skipped = 0, bad_trace = 0, at_opt = 0, bad_label = 0, steps = 0;
  for (ProblemType p : kAllProblems)
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const MipInstance inst = generate({p, "tiny", {}, seed});
      const auto opt = oracle::brute_force_optimum(inst);
      if (!opt.feasible) {
        ++skipped;
        continue;
      }
      const LabelSet ls = generate_labels(inst);
      ++traces;
      const bool maximize = inst.sense == Sense::Maximize;
      bool ok = !ls.solutions.empty() && ls.delta > 0;
      for (std::size_t k = 0; ok && k < ls.solutions.size(); ++k) {
        const Solution check = evaluate_solution(inst, ls.solutions[k].values);
        ok = check.feasible && close(check.objective, ls.solutions[k].objective);
        if (ok && k > 0) {
          const double gain = maximize ? check.objective - ls.solutions[k - 1].objective
                                       : ls.solutions[k - 1].objective - check.objective;
          ok = gain >= ls.delta * (1 - 1e-9);
          ++steps;
        }
      }
      if (!ok) {
        ++bad_trace;
        fmt::print(stderr, "  AC5 bad trace on {}\n", inst.name);
        continue;
      }
      const Solution& last = ls.solutions.back();
      if (!close(last.objective, opt.objective)) continue;
      ++at_opt;
      for (std::size_t k = 0; k < ls.vars.size(); ++k) {
        const long v = std::lround(last.values[ls.vars[k]]);
        if ((ls.labels[k] == Label::Stable1 && v != 1) || (ls.labels[k] == Label::Stable0 && v != 0)) ++bad_label;
      }
    }
  const double secs = t.seconds();
  return {bad_trace == 0 && bad_label == 0 && at_opt > 0 && secs < 120.0,
          fmt::format("{} traces ({} infeasible instances skipped, {} improving steps), {} bad traces, {} end at the "
                      "optimum, {} label disagreements, {:.1f} s",
                      traces, skipped, steps, bad_trace, at_opt, bad_label, secs)};
}

std::vector<Label> toy_labels(int n) {
  std::vector<Label> l;
  for (int i = 0; i < n; ++i) l.push_back(i % 3 == 0 ? Label::Stable1 : i % 3 == 1 ? Label::Stable0 : Label::Unstable);
  return l;
}

double worst_fd_error(const TriGraph& g, const GcnHyper& h, std::uint64_t seed) {
  const auto labels = toy_labels(g.num_vars());
  GcnParams p = init_params(h, seed);
  const auto analytic = gradients(g, p, h, labels);
  double worst = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    Eigen::MatrixXd fd(p.values[i].rows(), p.values[i].cols());
    for (Eigen::Index k = 0; k < fd.size(); ++k) {
      const double keep = p.values[i](k);
      p.values[i](k) = keep + kGradStep;
      const double up = bce_loss(forward(g, p, h), labels);
      p.values[i](k) = keep - kGradStep;
      const double down = bce_loss(forward(g, p, h), labels);
      p.values[i](k) = keep;
      fd(k) = (up - down) / (2 * kGradStep);
    }
    const auto& a = analytic.grads.values[i];
    const double denom = a.norm() + fd.norm();
    worst = std::max(worst, denom > 1e-10 ? (a - fd).norm() / denom : 0.0);
  }
  return worst;
}

Outcome ac6_gradient_check() {
  const TriGraph g = oracle::toy_graph(3, 2, 11, 0.7);
  GcnHyper h;
  h.d = 4;
  h.out_hidden = 3;
  double worst = 0.0;
  int matrices = 0;
  for (int variant = 0; variant < 3; ++variant) {
    GcnHyper v = h;
    v.literal_loops = variant == 1;
    v.attention = variant != 2;
    worst = std::max(worst, worst_fd_error(g, v, 2 + variant));
    matrices += static_cast<int>(init_params(v, 0).size());
  }
  return {worst <= kGradTol,
          fmt::format("{} parameter matrices over default/literal/no-attention, max relative error {:.2e}", matrices,
                      worst)};
}

Outcome ac7_gcn_invariants() {
  const GcnHyper h;
  std::mt19937_64 rng(7);
  double max_diff = 0.0;
  bool in_range = true;
  int outputs = 0;
  auto check_graph = [&](const TriGraph& g, std::uint64_t seed) {
    GcnParams p = init_params(h, seed);
    for (double gain : {1.0, 50.0}) {
      for (auto& m : p.values) m *= gain;
      const Eigen::VectorXd z = forward(g, p, h);
      outputs += static_cast<int>(z.size());
      in_range = in_range && (z.array() > 0.0).all() && (z.array() < 1.0).all();
    }
    p = init_params(h, seed);
    std::vector<int> perm(g.num_vars());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    const Eigen::VectorXd z = forward(g, p, h);
    const Eigen::VectorXd zp = forward(oracle::permute_vars(g, perm), p, h);
    for (int v = 0; v < g.num_vars(); ++v) max_diff = std::max(max_diff, std::abs(z[v] - zp[perm[v]]));
  };
  for (std::uint64_t s = 0; s < 5; ++s) check_graph(oracle::toy_graph(8, 6, s), s);
  for (ProblemType p : kAllProblems) check_graph(build_trigraph(generate({p, "tiny", {}, 1})), 1);
  return {in_range && max_diff <= kEquivTol,
          fmt::format("{} outputs {} (0,1), max equivariance difference {:.2e}", outputs,
                      in_range ? "all in" : "NOT all in", max_diff)};
}

Outcome ac8_metric_oracles() {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> len(1, 40), coarse(0, 5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = len(rng);
    Eigen::VectorXd s(n);
    std::vector<int> y(n);
    for (int i = 0; i < n; ++i) {
      s[i] = trial % 3 == 0 ? coarse(rng) / 5.0 : u(rng);
      y[i] = u(rng) < 0.3;
    }
    y[trial % n] = 1;
    worst = std::max(worst, std::abs(average_precision(s, y) - oracle::brute_force_ap(s, y)));
  }
  Eigen::VectorXd ex(3);
  ex << 0.9, 0.8, 0.3;
  Eigen::VectorXd za(4);
  za << 0.9, 0.6, 0.1, 0.45;
  const auto curve = accuracy_at_fraction(za, {1, 0, 0, 1}, {0.5});
  const bool spots = std::abs(average_precision(ex, {1, 0, 1}) - 5.0 / 6.0) <= kMetricTol &&
                     std::abs(primal_gap(110, 100) - 10.0 / (110 + 1e-10) * 100) <= kMetricTol &&
                     primal_gap(100, 100) == 0.0 && primal_gap(0, 0) == 0.0 &&
                     std::abs(optimality_gap(100, 90) - 10.0 / (100 + 1e-10) * 100) <= kMetricTol &&
                     optimality_gap(5, 5) == 0.0 && optimality_gap(0, -1) == kGapCap &&
                     curve.size() == 1 && curve[0].second == 1.0 &&
                     (prevalence_baseline({1, 0, 0, 1}).array() == 0.5).all();
  return {worst <= kMetricTol && spots,
          fmt::format("1000 random vectors, max |AP - oracle| {:.1e}; spot values {}", worst, spots ? "match" : "DIFFER")};
}

// Scaled-down learning signal on SC small: 14 training and 4 held-out instances.
Outcome ac9_learning_signal() {
  Timer t;
  std::vector<MipInstance> train_inst, test_inst;
  for (int k = 0; k < 14; ++k) train_inst.push_back(generate({ProblemType::SC, "small", {}, 9000 + static_cast<std::uint64_t>(k)}));
  for (int k = 0; k < 4; ++k) test_inst.push_back(generate({ProblemType::SC, "small", {}, 9100 + static_cast<std::uint64_t>(k)}));

  auto labelled = [](const MipInstance& inst) {
    const LabelSet ls = generate_labels(inst);
    LabelFile lf = label_file_from_json_text(labels_to_json_text(inst, ls));
    return std::make_pair(build_trigraph(inst), lf);
  };
  std::vector<std::pair<TriGraph, LabelFile>> train_raw, test_raw;
  for (const auto& i : train_inst) train_raw.push_back(labelled(i));
  for (const auto& i : test_inst) test_raw.push_back(labelled(i));
  const double label_secs = t.seconds();

  std::vector<TriGraph> fit;
  for (const auto& [g, lf] : train_raw) fit.push_back(g);
  const FeatureScaler scaler = fit_scaler(fit);
  TrainingSet data;
  for (const auto& [g, lf] : train_raw) {
    TriGraph s = apply_scaler(g, scaler);
    auto labels = align_labels(s, lf);
    data.emplace_back(std::move(s), std::move(labels));
  }

  std::vector<std::string> per_seed;
  bool pass = true;
  for (std::uint64_t seed : {0, 1, 2}) {
    GcnHyper h;
    h.seed = seed;
    const TrainResult tr = train(data, h);
    int wins = 0;
    std::string aps;
    for (const auto& [g, lf] : test_raw) {
      const TriGraph s = apply_scaler(g, scaler);
      const auto labels = align_labels(s, lf);
      const Eigen::VectorXd z = forward(s, tr.params, h);
      std::vector<double> zs;
      std::vector<int> y;
      for (std::size_t j = 0; j < labels.size(); ++j)
        if (labels[j] != Label::Unstable) {
          zs.push_back(z[static_cast<Eigen::Index>(j)]);
          y.push_back(labels[j] == Label::Stable1);
        }
      const Eigen::VectorXd zv = Eigen::Map<Eigen::VectorXd>(zs.data(), static_cast<Eigen::Index>(zs.size()));
      const double ap = average_precision(zv, y);
      const double base = average_precision(prevalence_baseline(y), y);
      wins += ap > base;
      aps += fmt::format(" {:.3f}/{:.3f}", ap, base);
    }
    pass = pass && wins >= 3;
    per_seed.push_back(fmt::format("seed {}: {}/4 wins (AP/baseline{})", seed, wins, aps));
  }
  std::string detail;
  for (const auto& s : per_seed) detail += s + "; ";
  detail += fmt::format("labels {:.0f} s, total {:.0f} s", label_secs, t.seconds());
  return {pass, detail};
}

// Approximate solving vs the plain solver on 20 tiny-plus SC test instances, 1 s each.
Outcome ac10_approximate_sanity() {
  const fs::path w = scratch("ac10");
  const ExperimentConfig cfg = config_from_ini_text(R"(
[experiment]
problem = SC
preset = tinyplus
train = 40
valid = 10
test = 20
seed = 10

[apply]
grid_time_limit = 1
run_time_limit = 1
reference_time_limit = 60
)");
  cmd_all(cfg, w);
  const auto report = nlohmann::json::parse(slurp(w / "report.json"));
  const auto& modes = report.at("aggregate").at("modes");
  const double approx = modes.at("approx").at("mean_primal_gap").get<double>();
  const double base = modes.at("baseline").at("mean_primal_gap").get<double>();
  int both_opt = 0;
  for (const auto& inst : report.at("instances"))
    both_opt += inst["runs"]["approx"]["status"] == "optimal" && inst["runs"]["baseline"]["status"] == "optimal";
  return {approx <= base + 1e-12,
          fmt::format("mean primal gap approx {:.4f}% vs baseline {:.4f}% (phi={}, eta={}; {} instances optimal in both); "
                      "table in {}",
                      approx, base, report["tuned"]["phi"].get<int>(), report["tuned"]["eta"].get<double>(), both_opt,
                      (w / "report.csv").string())};
}

Outcome ac11_generator_fidelity() {
  struct Expected {
    ProblemType problem;
    int vars_lo, vars_hi, rows_lo, rows_hi;
  };
  const Expected small[] = {
      {ProblemType::GA, 1152, 1152, 108, 108},
      {ProblemType::MIS, 125, 125, 1734, 1929},
      {ProblemType::SC, 750, 750, 550, 550},
      {ProblemType::MK, 315, 350, 19, 21},
  };
  int outside = 0, nondet = 0, checked = 0;
  for (const auto& e : small)
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const MipInstance a = generate({e.problem, "small", {}, seed});
      const MipInstance b = generate({e.problem, "small", {}, seed});
      ++checked;
      if (a.num_vars() < e.vars_lo || a.num_vars() > e.vars_hi || a.num_rows() < e.rows_lo || a.num_rows() > e.rows_hi)
        ++outside;
      if (instance_to_json_text(a) != instance_to_json_text(b)) ++nondet;
    }
  const fs::path x = scratch("ac11_a"), y = scratch("ac11_b");
  const ExperimentConfig cfg = config_from_ini_text("[experiment]\nproblem = MK\npreset = small\nscale = 0.05\n");
  cmd_gen(cfg, x);
  cmd_gen(cfg, y);
  int files = 0;
  for (const auto& split : kSplits)
    for (const auto& f : fs::directory_iterator(x / "instances" / split)) {
      ++files;
      if (slurp(f.path()) != slurp(y / "instances" / split / f.path().filename())) ++nondet;
    }
  return {outside == 0 && nondet == 0,
          fmt::format("{} small instances, {} outside the published ranges; {} regenerated files, {} differ", checked,
                      outside, files + checked, nondet)};
}

Outcome ac12_pipeline_smoke() {
  const char* config = R"(
[experiment]
problem = SC
preset = tiny
scale = 0.1
seed = 0
)";
  const ExperimentConfig cfg = config_from_ini_text(config);
  const fs::path a = scratch("ac12_a"), b = scratch("ac12_b");
  cmd_all(cfg, a);
  cmd_all(cfg, b);
  const bool same = slurp(a / "report.json") == slurp(b / "report.json") &&
                    slurp(a / "report.csv") == slurp(b / "report.csv") && !slurp(a / "report.json").empty();
  const auto report = nlohmann::json::parse(slurp(a / "report.json"));
  return {same && report["test_instances"] == 4,
          fmt::format("14/2/4 pipeline run twice, reports {}", same ? "identical" : "DIFFER")};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "solver oracle equivalence", ac1_solver_oracle},
      {2, "exactness of root branching", ac2_root_branching},
      {3, "phi = 0 cut equals fixing S", ac3_phi_zero_fixing},
      {4, "LP strong duality", ac4_strong_duality},
      {5, "proximity labeling", ac5_proximity_labeling},
      {6, "GCN gradient check", ac6_gradient_check},
      {7, "GCN invariants", ac7_gcn_invariants},
      {8, "metric oracles", ac8_metric_oracles},
      {9, "learning signal", ac9_learning_signal},
      {10, "approximate-approach sanity", ac10_approximate_sanity},
      {11, "generator fidelity", ac11_generator_fidelity},
      {12, "end-to-end pipeline smoke", ac12_pipeline_smoke},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
  int failed = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    fmt::print("{} AC{} {}: {}\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
