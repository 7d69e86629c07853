#include "mipgcn/pipeline.hpp"

#include "mipgcn/metrics.hpp"
#include "mipgcn/parallel.hpp"
#include "mipgcn/predictor.hpp"
#include "mipgcn/trigraph.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace mipgcn {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

[[noreturn]] void missing(const std::string& what) { throw PipelineError(PipelineError::MissingInput, what); }
[[noreturn]] void bad_config(const std::string& what) { throw PipelineError(PipelineError::InvalidConfig, what); }
[[noreturn]] void failure(const std::string& what) { throw PipelineError(PipelineError::RuntimeFailure, what); }

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) missing("missing input file: " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) failure("cannot write " + p.string());
  out << text;
  if (!out) failure("write failed: " + p.string());
}

void require_dir(const fs::path& p) {
  if (!fs::is_directory(p)) missing("missing input directory: " + p.string());
}

/// Stems of *.<ext> files in a directory, sorted.
std::vector<std::string> list_stems(const fs::path& dir, const std::string& ext) {
  require_dir(dir);
  std::vector<std::string> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ext) out.push_back(e.path().stem().string());
  std::sort(out.begin(), out.end());
  if (out.empty()) missing("no " + ext + " files in " + dir.string());
  return out;
}

std::string g17(double v) { return fmt::format("{:.17g}", v); }

// Config parsing.

template <class T>
T parse_number(const std::string& key, const std::string& raw) {
  T v{};
  const char* b = raw.data();
  const char* e = raw.data() + raw.size();
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e) bad_config(fmt::format("{}: cannot parse '{}'", key, raw));
  return v;
}

bool parse_bool(const std::string& key, const std::string& raw) {
  if (raw == "true" || raw == "1" || raw == "yes") return true;
  if (raw == "false" || raw == "0" || raw == "no") return false;
  bad_config(fmt::format("{}: expected a boolean, got '{}'", key, raw));
}

template <class T>
std::vector<T> parse_list(const std::string& key, const std::string& raw) {
  std::vector<T> out;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    out.push_back(parse_number<T>(key, item));
  }
  if (out.empty()) bad_config(key + ": empty list");
  return out;
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// Stage data access.

fs::path instance_path(const fs::path& w, const std::string& split, const std::string& name) {
  return w / "instances" / split / (name + ".json");
}

std::vector<std::string> split_names(const fs::path& w, const std::string& split) {
  return list_stems(w / "instances" / split, ".json");
}

MipInstance load_instance(const fs::path& p) {
  const std::string text = read_text(p);
  try {
    return instance_from_json_text(text);
  } catch (const std::exception& e) {
    failure(p.string() + ": " + e.what());
  }
}

LabelFile load_labels(const fs::path& w, const std::string& name) {
  const fs::path p = w / "labels" / (name + ".json");
  const std::string text = read_text(p);
  try {
    return label_file_from_json_text(text);
  } catch (const std::exception& e) {
    failure(p.string() + ": " + e.what());
  }
}

TriGraph load_graph(const fs::path& w, const std::string& name) {
  const fs::path p = w / "graphs" / (name + ".json");
  const std::string text = read_text(p);
  try {
    return graph_from_json_text(text);
  } catch (const std::exception& e) {
    failure(p.string() + ": " + e.what());
  }
}

struct Prediction {
  std::vector<std::string> names;
  Eigen::VectorXd z;
};

std::string prediction_csv(const TriGraph& g, const Eigen::VectorXd& z) {
  std::string out = "varname,z\n";
  for (int j = 0; j < g.num_vars(); ++j) out += fmt::format("{},{:.17g}\n", g.var_names[j], z[j]);
  return out;
}

Prediction load_prediction(const fs::path& w, const std::string& name) {
  const fs::path p = w / "predictions" / (name + ".csv");
  std::stringstream ss(read_text(p));
  std::string line;
  if (!std::getline(ss, line) || line != "varname,z") failure(p.string() + ": bad header");
  Prediction out;
  std::vector<double> z;
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    const auto comma = line.rfind(',');
    if (comma == std::string::npos) failure(p.string() + ": bad row '" + line + "'");
    out.names.push_back(line.substr(0, comma));
    try {
      z.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::exception&) {
      failure(p.string() + ": bad value in '" + line + "'");
    }
  }
  out.z = Eigen::Map<Eigen::VectorXd>(z.data(), static_cast<Eigen::Index>(z.size()));
  return out;
}

struct Tuned {
  int phi = 0;
  double eta = 1.0;
};

Tuned load_tuned(const fs::path& w) {
  const fs::path p = w / "tuned.json";
  try {
    const json j = json::parse(read_text(p));
    return {j.at("phi").get<int>(), j.at("eta").get<double>()};
  } catch (const PipelineError&) {
    throw;
  } catch (const std::exception& e) {
    failure(p.string() + ": " + e.what());
  }
}

BnbConfig solver_config(const ExperimentConfig& cfg, double time_limit) {
  BnbConfig b;
  b.time_limit_s = time_limit;
  b.node_limit = cfg.node_limit;
  b.seed = cfg.seed;
  return b;
}

/// Plain solve used as the reference objective for primal gaps.
struct Reference {
  std::optional<double> objective;
  SolveStatus status = SolveStatus::LimitReached;
};

Reference reference_solve(const ExperimentConfig& cfg, const MipInstance& inst) {
  const SolveResult r = solve(inst, solver_config(cfg, cfg.reference_time_limit_s));
  Reference ref;
  ref.status = r.status;
  if (r.has_incumbent()) ref.objective = r.incumbent->objective;
  return ref;
}

bool better(const MipInstance& inst, double a, double b) {
  return inst.sense == Sense::Maximize ? a > b : a < b;
}

/// Results CSV row parsed back for evaluation.
struct RunRow {
  std::string status;
  std::optional<double> objective;
  double lower_bound = -kInf;
  long nodes = 0;
  double wall = 0.0;
};

std::map<std::string, RunRow> load_results(const fs::path& p) {
  std::map<std::string, RunRow> out;
  std::stringstream ss(read_text(p));
  std::string line;
  std::getline(ss, line);
  if (line + "\n" != results_csv_header()) failure(p.string() + ": bad header");
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    if (f.size() != 9) failure(p.string() + ": bad row '" + line + "'");
    RunRow r;
    r.status = f[4];
    try {
      if (!f[5].empty()) r.objective = std::stod(f[5]);
      r.lower_bound = std::stod(f[6]);
      r.nodes = std::stol(f[7]);
      r.wall = std::stod(f[8]);
    } catch (const std::exception&) {
      failure(p.string() + ": bad row '" + line + "'");
    }
    out[f[0]] = r;
  }
  return out;
}

const std::vector<std::string> kModes = {"baseline", "approx", "exact"};

json number_or_null(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace

int ExperimentConfig::count(int base) const {
  return std::max(1, static_cast<int>(std::lround(base * scale)));
}

ExperimentConfig config_from_ini_text(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    bad_config(std::string("config: ") + e.what());
  }
  ExperimentConfig cfg;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) bad_config("config: key '" + section + "' outside a section");
    for (const auto& [key, node] : body) {
      const std::string k = section + "." + key;
      const std::string v = node.data();
      if (section == "generator") {
        cfg.params[key] = parse_number<double>(k, v);
        continue;
      }
      if (k == "experiment.problem") {
        try {
          cfg.problem = problem_from_string(v);
        } catch (const std::exception&) {
          bad_config(k + ": unknown problem '" + v + "'");
        }
      } else if (k == "experiment.preset") {
        cfg.preset = lower(v);
      } else if (k == "experiment.train") {
        cfg.train = parse_number<int>(k, v);
      } else if (k == "experiment.valid") {
        cfg.valid = parse_number<int>(k, v);
      } else if (k == "experiment.test") {
        cfg.test = parse_number<int>(k, v);
      } else if (k == "experiment.scale") {
        cfg.scale = parse_number<double>(k, v);
      } else if (k == "experiment.seed") {
        cfg.seed = parse_number<std::uint64_t>(k, v);
      } else if (k == "experiment.jobs") {
        cfg.jobs = parse_number<int>(k, v);
      } else if (k == "label.max_iters") {
        cfg.label.max_iters = parse_number<int>(k, v);
      } else if (k == "label.base_time_limit") {
        cfg.label.base_time_limit_s = parse_number<double>(k, v);
      } else if (k == "label.max_doublings") {
        cfg.label.max_doublings = parse_number<int>(k, v);
      } else if (k == "label.mode") {
        cfg.label.mode = v;
      } else if (k == "gcn.d") {
        cfg.gcn.d = parse_number<int>(k, v);
      } else if (k == "gcn.transitions") {
        cfg.gcn.transitions = parse_number<int>(k, v);
      } else if (k == "gcn.out_hidden") {
        cfg.gcn.out_hidden = parse_number<int>(k, v);
      } else if (k == "gcn.lr") {
        cfg.gcn.lr = parse_number<double>(k, v);
      } else if (k == "gcn.epochs") {
        cfg.gcn.epochs = parse_number<int>(k, v);
      } else if (k == "gcn.seed") {
        cfg.gcn.seed = parse_number<std::uint64_t>(k, v);
      } else if (k == "gcn.attention") {
        cfg.gcn.attention = parse_bool(k, v);
      } else if (k == "gcn.literal_loops") {
        cfg.gcn.literal_loops = parse_bool(k, v);
      } else if (k == "apply.phi_grid") {
        cfg.phi_grid = parse_list<int>(k, v);
      } else if (k == "apply.eta_grid") {
        cfg.eta_grid = parse_list<double>(k, v);
      } else if (k == "apply.grid_time_limit") {
        cfg.grid_time_limit_s = parse_number<double>(k, v);
      } else if (k == "apply.run_time_limit") {
        cfg.run_time_limit_s = parse_number<double>(k, v);
      } else if (k == "apply.reference_time_limit") {
        cfg.reference_time_limit_s = parse_number<double>(k, v);
      } else if (k == "apply.node_limit") {
        cfg.node_limit = parse_number<long>(k, v);
      } else if (k == "eval.fractions") {
        cfg.fractions = parse_list<double>(k, v);
      } else {
        bad_config("config: unknown key '" + k + "'");
      }
    }
  }

  if (cfg.train < 1 || cfg.valid < 1 || cfg.test < 1) bad_config("config: split counts must be >= 1");
  if (!(cfg.scale > 0)) bad_config("config: scale must be > 0");
  if (cfg.jobs < 1) bad_config("config: jobs must be >= 1");
  if (cfg.label.mode != "proximity" && cfg.label.mode != "optimal") bad_config("config: label.mode must be proximity or optimal");
  if (cfg.label.max_iters < 1 || !(cfg.label.base_time_limit_s > 0) || cfg.label.max_doublings < 0)
    bad_config("config: label limits must be positive");
  try {
    validate(cfg.gcn);
  } catch (const std::exception& e) {
    bad_config(std::string("config: ") + e.what());
  }
  for (int phi : cfg.phi_grid)
    if (phi < 0) bad_config("config: phi must be >= 0");
  for (double eta : cfg.eta_grid)
    if (!(eta > 0 && eta <= 1)) bad_config("config: eta must be in (0, 1]");
  for (double f : cfg.fractions)
    if (!(f > 0 && f <= 1)) bad_config("config: fractions must be in (0, 1]");
  if (!(cfg.grid_time_limit_s > 0) || !(cfg.run_time_limit_s > 0) || !(cfg.reference_time_limit_s > 0) || cfg.node_limit < 1)
    bad_config("config: solver limits must be positive");
  const auto presets = list_presets(cfg.problem);
  const bool known = cfg.preset == "custom" || std::any_of(presets.begin(), presets.end(),
                                                          [&](const PresetInfo& p) { return p.name == cfg.preset; });
  if (!known) bad_config("config: unknown preset '" + cfg.preset + "'");
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) bad_config("config file not readable: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return config_from_ini_text(ss.str());
}

void cmd_gen(const ExperimentConfig& cfg, const fs::path& w) {
  const std::string prefix = fmt::format("{}_{}", lower(to_string(cfg.problem)), cfg.preset);
  const int counts[] = {cfg.count(cfg.train), cfg.count(cfg.valid), cfg.count(cfg.test)};
  for (std::size_t s = 0; s < kSplits.size(); ++s) {
    const fs::path dir = w / "instances" / kSplits[s];
    if (fs::exists(dir)) fs::remove_all(dir);
    fs::create_directories(dir);
    parallel_for(counts[s], cfg.jobs, [&](int k) {
      GenSpec spec;
      spec.problem = cfg.problem;
      spec.preset = cfg.preset;
      spec.params = cfg.params;
      spec.seed = cfg.seed * 1'000'003ULL + s * 100'000ULL + static_cast<std::uint64_t>(k);
      MipInstance inst;
      try {
        inst = generate(spec);
      } catch (const std::exception& e) {
        failure(std::string("generator: ") + e.what());
      }
      inst.name = fmt::format("{}_{}_{:04d}", prefix, kSplits[s], k);
      write_text(dir / (inst.name + ".json"), instance_to_json_text(inst));
    });
    fmt::print(stderr, "gen: {} {} instances\n", counts[s], kSplits[s]);
  }
}

void cmd_label(const ExperimentConfig& cfg, const fs::path& w) {
  std::vector<std::pair<std::string, std::string>> work;
  for (const auto& split : kSplits)
    for (const auto& name : split_names(w, split)) work.emplace_back(split, name);
  const fs::path dir = w / "labels";
  fs::create_directories(dir);
  parallel_for(static_cast<int>(work.size()), cfg.jobs, [&](int i) {
    const auto& [split, name] = work[i];
    const MipInstance inst = load_instance(instance_path(w, split, name));
    LabelSet labels;
    try {
      labels = generate_labels(inst, cfg.label);
    } catch (const std::exception& e) {
      failure(name + ": labeling failed: " + e.what());
    }
    write_text(dir / (name + ".json"), labels_to_json_text(inst, labels));
  });
  fmt::print(stderr, "label: {} instances\n", work.size());
}

void cmd_featurize(const ExperimentConfig& cfg, const fs::path& w) {
  std::vector<std::pair<std::string, std::string>> work;
  for (const auto& split : kSplits)
    for (const auto& name : split_names(w, split)) work.emplace_back(split, name);
  std::vector<TriGraph> graphs(work.size());
  parallel_for(static_cast<int>(work.size()), cfg.jobs, [&](int i) {
    const MipInstance inst = load_instance(instance_path(w, work[i].first, work[i].second));
    try {
      graphs[i] = build_trigraph(inst);
    } catch (const std::exception& e) {
      failure(work[i].second + ": featurization failed: " + e.what());
    }
  });
  std::vector<TriGraph> train;
  for (std::size_t i = 0; i < work.size(); ++i)
    if (work[i].first == "train") train.push_back(graphs[i]);
  const FeatureScaler scaler = fit_scaler(train);
  write_text(w / "scaler.json", scaler_to_json_text(scaler));
  parallel_for(static_cast<int>(work.size()), cfg.jobs, [&](int i) {
    write_text(w / "graphs" / (work[i].second + ".json"), graph_to_json_text(apply_scaler(graphs[i], scaler)));
  });
  fmt::print(stderr, "featurize: {} graphs, scaler fit on {}\n", work.size(), train.size());
}

void cmd_train(const ExperimentConfig& cfg, const fs::path& w) {
  require_dir(w / "graphs");
  require_dir(w / "labels");
  const auto names = split_names(w, "train");
  TrainingSet data(names.size());
  parallel_for(static_cast<int>(names.size()), cfg.jobs, [&](int i) {
    TriGraph g = load_graph(w, names[i]);
    const LabelFile lf = load_labels(w, names[i]);
    std::vector<Label> labels;
    try {
      labels = align_labels(g, lf);
    } catch (const std::exception& e) {
      failure(names[i] + ": " + e.what());
    }
    data[i] = {std::move(g), std::move(labels)};
  });
  const TrainResult r = train(data, cfg.gcn);
  write_text(w / "model.json", model_to_json_text(cfg.gcn, r.params));
  std::string hist = "epoch,loss\n";
  for (std::size_t e = 0; e < r.history.size(); ++e) hist += fmt::format("{},{:.17g}\n", e, r.history[e]);
  write_text(w / "history.csv", hist);
  fmt::print(stderr, "train: {} graphs, {} epochs, final loss {:.6g}\n", data.size(), r.history.size(),
             r.history.empty() ? 0.0 : r.history.back());
}

void cmd_predict(const ExperimentConfig& cfg, const fs::path& w) {
  require_dir(w / "graphs");
  GcnHyper h;
  GcnParams p;
  try {
    std::tie(h, p) = model_from_json_text(read_text(w / "model.json"));
  } catch (const PipelineError&) {
    throw;
  } catch (const std::exception& e) {
    failure(std::string("model.json: ") + e.what());
  }
  std::vector<std::string> names;
  for (const char* split : {"valid", "test"})
    for (const auto& n : split_names(w, split)) names.push_back(n);
  parallel_for(static_cast<int>(names.size()), cfg.jobs, [&](int i) {
    const TriGraph g = load_graph(w, names[i]);
    write_text(w / "predictions" / (names[i] + ".csv"), prediction_csv(g, forward(g, p, h)));
  });
  fmt::print(stderr, "predict: {} instances\n", names.size());
}

void cmd_gridsearch(const ExperimentConfig& cfg, const fs::path& w) {
  const auto names = split_names(w, "valid");
  std::vector<std::optional<ValidationCase>> slots(names.size());
  parallel_for(static_cast<int>(names.size()), cfg.jobs, [&](int i) {
    ValidationCase c;
    c.instance = load_instance(instance_path(w, "valid", names[i]));
    const Prediction pred = load_prediction(w, names[i]);
    c.names = pred.names;
    c.z = pred.z;
    const Reference ref = reference_solve(cfg, c.instance);
    if (!ref.objective) return;
    c.reference_objective = *ref.objective;
    slots[i] = std::move(c);
  });
  std::vector<ValidationCase> cases;
  json refs = json::object();
  for (std::size_t i = 0; i < names.size(); ++i)
    if (slots[i]) {
      refs[names[i]] = slots[i]->reference_objective;
      cases.push_back(std::move(*slots[i]));
    }
  if (cases.empty()) failure("gridsearch: no validation instance has a reference solution");
  GridResult g;
  try {
    g = grid_search(cases, cfg.phi_grid, cfg.eta_grid, solver_config(cfg, cfg.grid_time_limit_s), cfg.jobs);
  } catch (const std::exception& e) {
    failure(std::string("gridsearch: ") + e.what());
  }
  json cells = json::array();
  for (const auto& c : g.cells) cells.push_back({{"phi", c.phi}, {"eta", c.eta}, {"mean_primal_gap", c.mean_primal_gap}});
  const json out = {{"phi", g.phi}, {"eta", g.eta}, {"cells", cells}, {"references", refs}, {"runs", g.runs}};
  write_text(w / "tuned.json", out.dump(1) + "\n");
  fmt::print(stderr, "gridsearch: phi={} eta={} over {} instances\n", g.phi, g.eta, cases.size());
}

void cmd_run(const ExperimentConfig& cfg, const fs::path& w, const std::string& mode) {
  if (mode != "approx" && mode != "exact" && mode != "baseline") bad_config("run: unknown mode '" + mode + "'");
  const auto names = split_names(w, "test");
  Tuned tuned;
  if (mode != "baseline") tuned = load_tuned(w);
  std::vector<std::string> rows(names.size());
  parallel_for(static_cast<int>(names.size()), cfg.jobs, [&](int i) {
    const MipInstance inst = load_instance(instance_path(w, "test", names[i]));
    ApplyConfig ac;
    ac.phi = tuned.phi;
    ac.eta = tuned.eta;
    ac.solver = solver_config(cfg, cfg.run_time_limit_s);
    SolveResult r;
    try {
      if (mode == "baseline") {
        r = solve(inst, ac.solver);
      } else {
        const Prediction pred = load_prediction(w, names[i]);
        r = mode == "approx" ? approximate_solve(inst, pred.names, pred.z, ac) : exact_solve(inst, pred.names, pred.z, ac);
      }
    } catch (const PipelineError&) {
      throw;
    } catch (const std::exception& e) {
      failure(names[i] + ": " + e.what());
    }
    rows[i] = results_csv_row(names[i], mode, mode == "baseline" ? 0 : tuned.phi, mode == "baseline" ? 1.0 : tuned.eta, r);
  });
  std::string out = results_csv_header();
  for (const auto& r : rows) out += r;
  write_text(w / "results" / (mode + ".csv"), out);
  fmt::print(stderr, "run {}: {} instances\n", mode, names.size());
}

void cmd_eval(const ExperimentConfig& cfg, const fs::path& w) {
  const auto names = split_names(w, "test");
  std::map<std::string, std::map<std::string, RunRow>> results;
  for (const auto& m : kModes)
    if (fs::exists(w / "results" / (m + ".csv"))) results[m] = load_results(w / "results" / (m + ".csv"));

  struct PerInstance {
    json record;
    std::vector<double> z;
    std::vector<int> y;
  };
  std::vector<PerInstance> per(names.size());
  parallel_for(static_cast<int>(names.size()), cfg.jobs, [&](int i) {
    const std::string& name = names[i];
    const MipInstance inst = load_instance(instance_path(w, "test", name));
    const LabelFile lf = load_labels(w, name);
    const Prediction pred = load_prediction(w, name);
    std::map<std::string, Label> by_name(lf.labels.begin(), lf.labels.end());
    auto& out = per[i];
    for (std::size_t j = 0; j < pred.names.size(); ++j) {
      const auto it = by_name.find(pred.names[j]);
      if (it == by_name.end()) failure(name + ": no label for " + pred.names[j]);
      if (it->second == Label::Unstable) continue;
      out.z.push_back(pred.z[static_cast<Eigen::Index>(j)]);
      out.y.push_back(it->second == Label::Stable1 ? 1 : 0);
    }
    json rec = {{"instance", name}, {"binaries", pred.names.size()}, {"stable", out.y.size()}};
    const int positives = static_cast<int>(std::count(out.y.begin(), out.y.end(), 1));
    rec["positives"] = positives;
    if (positives > 0) {
      const Eigen::VectorXd z = Eigen::Map<const Eigen::VectorXd>(out.z.data(), static_cast<Eigen::Index>(out.z.size()));
      rec["ap"] = average_precision(z, out.y);
      rec["ap_baseline"] = average_precision(prevalence_baseline(out.y), out.y);
    } else {
      rec["ap"] = nullptr;
      rec["ap_baseline"] = nullptr;
    }

    Reference ref = reference_solve(cfg, inst);
    std::optional<double> best = ref.objective;
    for (const auto& [mode, rows] : results) {
      const auto it = rows.find(name);
      if (it != rows.end() && it->second.objective && (!best || better(inst, *it->second.objective, *best)))
        best = it->second.objective;
    }
    rec["reference_objective"] = number_or_null(best);
    rec["reference_status"] = to_string(ref.status);
    json runs = json::object();
    for (const auto& [mode, rows] : results) {
      const auto it = rows.find(name);
      if (it == rows.end()) failure(fmt::format("results/{}.csv: no row for {}", mode, name));
      const RunRow& r = it->second;
      json run = {{"status", r.status}, {"objective", number_or_null(r.objective)}, {"nodes", r.nodes}};
      if (r.objective && best) run["primal_gap"] = primal_gap(*r.objective, *best);
      else run["primal_gap"] = nullptr;
      // The approximate run's bound only covers the restricted region.
      if (r.objective && mode != "approx" && std::isfinite(r.lower_bound))
        run["optimality_gap"] = optimality_gap(*r.objective, r.lower_bound);
      else run["optimality_gap"] = nullptr;
      runs[mode] = run;
    }
    rec["runs"] = runs;
    out.record = std::move(rec);
  });

  json instances = json::array();
  std::vector<double> ap, ap_base, pooled_z;
  std::vector<int> pooled_y;
  int wins = 0;
  for (const auto& p : per) {
    instances.push_back(p.record);
    if (!p.record["ap"].is_null()) {
      ap.push_back(p.record["ap"].get<double>());
      ap_base.push_back(p.record["ap_baseline"].get<double>());
      if (ap.back() > ap_base.back()) ++wins;
    }
    pooled_z.insert(pooled_z.end(), p.z.begin(), p.z.end());
    pooled_y.insert(pooled_y.end(), p.y.begin(), p.y.end());
  }
  json modes = json::object();
  for (const auto& [mode, rows] : results) {
    std::vector<double> pg, og;
    int found = 0;
    for (const auto& p : per) {
      const json& r = p.record["runs"][mode];
      if (!r["objective"].is_null()) ++found;
      pg.push_back(r["primal_gap"].is_null() ? 100.0 : r["primal_gap"].get<double>());
      if (!r["optimality_gap"].is_null()) og.push_back(r["optimality_gap"].get<double>());
    }
    modes[mode] = {{"mean_primal_gap", mean(pg)},
                   {"mean_optimality_gap", og.empty() ? json(nullptr) : json(mean(og))},
                   {"with_incumbent", found}};
  }
  json curve = json::array();
  std::string curve_csv = "fraction,accuracy\n";
  if (!pooled_y.empty()) {
    const Eigen::VectorXd z = Eigen::Map<const Eigen::VectorXd>(pooled_z.data(), static_cast<Eigen::Index>(pooled_z.size()));
    for (const auto& [f, acc] : accuracy_at_fraction(z, pooled_y, cfg.fractions)) {
      curve.push_back({{"fraction", f}, {"accuracy", acc}});
      curve_csv += fmt::format("{:.17g},{:.17g}\n", f, acc);
    }
  }
  json tuned = nullptr;
  if (fs::exists(w / "tuned.json")) {
    const Tuned t = load_tuned(w);
    tuned = {{"phi", t.phi}, {"eta", t.eta}};
  }
  const json report = {
      {"problem", to_string(cfg.problem)},
      {"preset", cfg.preset},
      {"test_instances", names.size()},
      {"tuned", tuned},
      {"aggregate",
       {{"mean_ap", ap.empty() ? json(nullptr) : json(mean(ap))},
        {"mean_ap_baseline", ap_base.empty() ? json(nullptr) : json(mean(ap_base))},
        {"ap_instances", ap.size()},
        {"ap_wins", wins},
        {"modes", modes}}},
      {"curve", curve},
      {"instances", instances}};
  write_text(w / "report.json", report.dump(1) + "\n");
  write_text(w / "curve.csv", curve_csv);

  std::string csv = "instance,ap,ap_baseline,mode,status,objective,reference_objective,primal_gap,optimality_gap,nodes\n";
  auto cell = [](const json& v) { return v.is_null() ? std::string() : g17(v.get<double>()); };
  for (const auto& p : per) {
    const json& r = p.record;
    if (results.empty())
      csv += fmt::format("{},{},{},,,,{},,,\n", r["instance"].get<std::string>(), cell(r["ap"]), cell(r["ap_baseline"]),
                         cell(r["reference_objective"]));
    for (const auto& [mode, rows] : results) {
      const json& run = r["runs"][mode];
      csv += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", r["instance"].get<std::string>(), cell(r["ap"]),
                         cell(r["ap_baseline"]), mode, run["status"].get<std::string>(), cell(run["objective"]),
                         cell(r["reference_objective"]), cell(run["primal_gap"]), cell(run["optimality_gap"]),
                         run["nodes"].get<long>());
    }
  }
  write_text(w / "report.csv", csv);

  std::string timings = "instance,mode,wall_time_s\n";
  for (const auto& [mode, rows] : results)
    for (const auto& [name, r] : rows) timings += fmt::format("{},{},{:.17g}\n", name, mode, r.wall);
  write_text(w / "timings.csv", timings);

  fmt::print("test instances: {}  AP wins over prevalence: {}/{}\n", names.size(), wins, ap.size());
  if (!ap.empty()) fmt::print("mean AP {:.4f}  prevalence {:.4f}\n", mean(ap), mean(ap_base));
  for (const auto& [mode, m] : modes.items())
    fmt::print("{:<9} mean primal gap {:.4f}%  incumbents {}\n", mode, m["mean_primal_gap"].get<double>(),
               m["with_incumbent"].get<int>());
}

void cmd_all(const ExperimentConfig& cfg, const fs::path& w) {
  cmd_gen(cfg, w);
  cmd_label(cfg, w);
  cmd_featurize(cfg, w);
  cmd_train(cfg, w);
  cmd_predict(cfg, w);
  cmd_gridsearch(cfg, w);
  for (const auto& m : kModes) cmd_run(cfg, w, m);
  cmd_eval(cfg, w);
}

}  // namespace mipgcn
