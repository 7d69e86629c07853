#include "mipgcn/gcn.hpp"

#include "mipgcn/autodiff.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <stdexcept>

namespace mipgcn {

namespace {

using ad::Tape;
using Id = Tape::Id;
using json = nlohmann::ordered_json;

constexpr const char* kRoles[] = {"Vo", "oC", "Vc", "Co", "oV", "Cv"};
constexpr const char* kAttention[] = {"Vo", "Vc", "Co", "Cv"};

struct Shape {
  std::string name;
  int rows, cols;
  bool bias;
};

std::vector<Shape> shapes(const GcnHyper& h) {
  const int d = h.d;
  std::vector<Shape> s = {{"emb_v.W", d, kVarFeatures, false},  {"emb_v.b", d, 1, true},
                          {"emb_c.W", d, kConsFeatures, false}, {"emb_c.b", d, 1, true},
                          {"emb_o.W", d, kObjFeatures, false},  {"emb_o.b", d, 1, true}};
  for (int t = 1; t <= h.transitions; ++t)
    for (const char* role : kRoles) {
      const std::string base = "t" + std::to_string(t) + "." + role;
      s.push_back({base + ".W", d, 2 * d, false});
      s.push_back({base + ".b", d, 1, true});
    }
  for (const char* pair : kAttention) s.push_back({std::string("att.") + pair, 1, 2 * d + kEdgeFeatures, false});
  s.push_back({"out1.W", h.out_hidden, 2 * d, false});
  s.push_back({"out1.b", h.out_hidden, 1, true});
  s.push_back({"out2.W", 1, h.out_hidden, false});
  s.push_back({"out2.b", 1, 1, true});
  return s;
}

// Edge lists in the index form the attention op wants.
struct GraphTensors {
  Eigen::MatrixXd vc_feats;
  std::vector<int> vc_var, vc_cons;
  std::vector<int> all_vars, all_cons, zeros_v, zeros_c;

  explicit GraphTensors(const TriGraph& g) {
    const auto ne = static_cast<Eigen::Index>(g.vc_edges.size());
    vc_feats.resize(ne, kEdgeFeatures);
    for (Eigen::Index e = 0; e < ne; ++e) {
      const auto& edge = g.vc_edges[e];
      vc_feats.row(e) = edge.features.transpose();
      vc_var.push_back(edge.var);
      vc_cons.push_back(edge.cons);
    }
    for (int v = 0; v < g.num_vars(); ++v) all_vars.push_back(v);
    for (int c = 0; c < g.num_cons(); ++c) all_cons.push_back(c);
    zeros_v.assign(g.num_vars(), 0);
    zeros_c.assign(g.num_cons(), 0);
  }
};

void check_graph(const TriGraph& g) {
  if (g.var_features.rows() != g.num_vars() || g.var_features.cols() != kVarFeatures ||
      g.cons_features.rows() != g.num_cons() || g.cons_features.cols() != kConsFeatures ||
      g.obj_features.size() != kObjFeatures || g.vo_features.rows() != g.num_vars() ||
      g.co_features.rows() != g.num_cons())
    throw std::invalid_argument("graph dimensions do not match the network");
}

// Builds the network on the tape; returns the n_var x 1 node holding z.
Id build(Tape& tape, const TriGraph& g, const std::vector<Id>& p, const GcnParams& params, const GcnHyper& h) {
  check_graph(g);
  const GraphTensors gt(g);
  auto P = [&](const std::string& name) { return p[params.index(name)]; };
  auto layer = [&](Id a, Id b, const std::string& base) {
    return tape.relu(tape.linear(tape.concat_cols(a, b), P(base + ".W"), P(base + ".b")));
  };
  const int nv = g.num_vars(), nc = g.num_cons();

  const Id xv = tape.input(g.var_features), xc = tape.input(g.cons_features);
  const Id xo = tape.input(g.obj_features.transpose());
  const Id hv0 = tape.relu(tape.linear(xv, P("emb_v.W"), P("emb_v.b")));
  Id hv = hv0;
  Id hc = tape.relu(tape.linear(xc, P("emb_c.W"), P("emb_c.b")));
  Id ho = tape.relu(tape.linear(xo, P("emb_o.W"), P("emb_o.b")));

  for (int t = 1; t <= h.transitions; ++t) {
    const std::string T = "t" + std::to_string(t) + ".";
    // Step 1: variables to the objective.
    ho = layer(ho, tape.attend(ho, hv, P("att.Vo"), g.vo_features, gt.zeros_v, gt.all_vars, h.attention), T + "Vo");
    // Step 2: objective and variables to constraints.
    const Id agg_c = tape.attend(hc, hv, P("att.Vc"), gt.vc_feats, gt.vc_cons, gt.vc_var, h.attention);
    Id hc_new;
    if (h.literal_loops) {
      std::vector<Id> rows;
      for (int c = 0; c < nc; ++c) {
        ho = layer(ho, tape.row(hc, c), T + "oC");
        rows.push_back(layer(ho, tape.row(agg_c, c), T + "Vc"));
      }
      hc_new = nc > 0 ? tape.stack_rows(rows) : hc;
    } else {
      ho = layer(ho, tape.mean_rows(hc), T + "oC");
      hc_new = layer(tape.repeat_rows(ho, nc), agg_c, T + "Vc");
    }
    hc = hc_new;
    // Step 3: constraints to the objective.
    ho = layer(ho, tape.attend(ho, hc, P("att.Co"), g.co_features, gt.zeros_c, gt.all_cons, h.attention), T + "Co");
    // Step 4: objective and constraints to variables.
    const Id agg_v = tape.attend(hv, hc, P("att.Cv"), gt.vc_feats, gt.vc_var, gt.vc_cons, h.attention);
    Id hv_new;
    if (h.literal_loops) {
      std::vector<Id> rows;
      for (int v = 0; v < nv; ++v) {
        ho = layer(ho, tape.row(hv, v), T + "oV");
        rows.push_back(layer(ho, tape.row(agg_v, v), T + "Cv"));
      }
      hv_new = nv > 0 ? tape.stack_rows(rows) : hv;
    } else {
      ho = layer(ho, tape.mean_rows(hv), T + "oV");
      hv_new = layer(tape.repeat_rows(ho, nv), agg_v, T + "Cv");
    }
    hv = hv_new;
  }
  const Id hidden = tape.relu(tape.linear(tape.concat_cols(hv0, hv), P("out1.W"), P("out1.b")));
  return tape.sigmoid(tape.linear(hidden, P("out2.W"), P("out2.b")));
}

std::vector<Id> load(Tape& tape, const GcnParams& p) {
  std::vector<Id> ids;
  for (const auto& m : p.values) ids.push_back(tape.input(m));
  return ids;
}

std::uint64_t splitmix(std::uint64_t& s) {
  std::uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

int GcnParams::index(const std::string& name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw std::out_of_range("no parameter '" + name + "'");
  return static_cast<int>(it - names.begin());
}

void validate(const GcnHyper& h) {
  if (h.d < 1) throw std::invalid_argument("hidden dimension must be >= 1");
  if (h.transitions < 1) throw std::invalid_argument("transitions must be >= 1");
  if (h.out_hidden < 1) throw std::invalid_argument("output hidden dimension must be >= 1");
  if (!(h.lr >= 0.0)) throw std::invalid_argument("learning rate must be >= 0");
  if (h.epochs < 0) throw std::invalid_argument("epochs must be >= 0");
}

GcnParams init_params(const GcnHyper& h, std::uint64_t seed) {
  validate(h);
  GcnParams p;
  std::uint64_t state = seed;
  for (const auto& s : shapes(h)) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(s.rows, s.cols);
    if (!s.bias) {
      const double bound = std::sqrt(6.0 / (s.rows + s.cols));
      for (Eigen::Index i = 0; i < m.size(); ++i) {
        const double u = static_cast<double>(splitmix(state) >> 11) * 0x1.0p-53;
        m(i) = (2.0 * u - 1.0) * bound;
      }
    }
    p.names.push_back(s.name);
    p.values.push_back(std::move(m));
  }
  return p;
}

Eigen::VectorXd forward(const TriGraph& g, const GcnParams& p, const GcnHyper& h) {
  validate(h);
  Tape tape;
  const auto ids = load(tape, p);
  const Eigen::VectorXd z = tape.value(build(tape, g, ids, p, h)).col(0);
  // Keep saturated outputs inside the open interval.
  constexpr double lo = std::numeric_limits<double>::min();
  const double hi = std::nextafter(1.0, 0.0);
  return z.cwiseMax(lo).cwiseMin(hi);
}

std::vector<int> label_targets(const std::vector<Label>& labels) {
  std::vector<int> t;
  t.reserve(labels.size());
  for (auto l : labels) t.push_back(l == Label::Stable1 ? 1 : l == Label::Stable0 ? 0 : -1);
  return t;
}

std::vector<Label> align_labels(const TriGraph& g, const LabelFile& labels) {
  std::map<std::string, Label> by_name(labels.labels.begin(), labels.labels.end());
  std::vector<Label> out;
  for (const auto& name : g.var_names) {
    const auto it = by_name.find(name);
    if (it == by_name.end()) throw ParseError("no label for variable '" + name + "' of " + g.instance);
    out.push_back(it->second);
  }
  return out;
}

double bce_loss(const Eigen::VectorXd& z, const std::vector<Label>& labels) {
  Tape tape;
  return tape.value(tape.bce(tape.input(z), label_targets(labels)))(0, 0);
}

GradientResult gradients(const TriGraph& g, const GcnParams& p, const GcnHyper& h, const std::vector<Label>& labels) {
  validate(h);
  if (static_cast<int>(labels.size()) != g.num_vars()) throw std::invalid_argument("one label per variable node expected");
  Tape tape;
  const auto ids = load(tape, p);
  const Id loss = tape.bce(build(tape, g, ids, p, h), label_targets(labels));
  tape.backward(loss);
  GradientResult r;
  r.loss = tape.value(loss)(0, 0);
  r.grads.names = p.names;
  for (Id id : ids) r.grads.values.push_back(tape.grad(id));
  return r;
}

TrainResult train(const TrainingSet& data, const GcnHyper& h) { return train(data, h, init_params(h, h.seed)); }

TrainResult train(const TrainingSet& data, const GcnHyper& h, GcnParams start) {
  validate(h);
  if (data.empty()) throw std::invalid_argument("empty training set");
  std::vector<std::size_t> usable;
  for (std::size_t k = 0; k < data.size(); ++k)
    if (std::any_of(data[k].second.begin(), data[k].second.end(), [](Label l) { return l != Label::Unstable; }))
      usable.push_back(k);
  if (usable.empty()) throw std::invalid_argument("training set has no stable labels");

  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  TrainResult r;
  r.params = std::move(start);
  std::vector<Eigen::MatrixXd> m, v;
  for (const auto& x : r.params.values) {
    m.push_back(Eigen::MatrixXd::Zero(x.rows(), x.cols()));
    v.push_back(Eigen::MatrixXd::Zero(x.rows(), x.cols()));
  }
  std::uint64_t state = h.seed ^ 0x5deece66dULL;
  long step = 0;
  for (int epoch = 0; epoch < h.epochs; ++epoch) {
    for (std::size_t k = usable.size(); k > 1; --k) std::swap(usable[k - 1], usable[splitmix(state) % k]);
    double total = 0.0;
    for (std::size_t k : usable) {
      const auto gr = gradients(data[k].first, r.params, h, data[k].second);
      total += gr.loss;
      ++step;
      const double c1 = 1.0 - std::pow(b1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(b2, static_cast<double>(step));
      for (std::size_t i = 0; i < r.params.size(); ++i) {
        const auto& gi = gr.grads.values[i];
        m[i] = b1 * m[i] + (1.0 - b1) * gi;
        v[i] = b2 * v[i] + (1.0 - b2) * gi.cwiseProduct(gi);
        r.params.values[i].array() -= h.lr * (m[i].array() / c1) / ((v[i].array() / c2).sqrt() + eps);
      }
    }
    r.history.push_back(total / static_cast<double>(usable.size()));
  }
  return r;
}

std::string model_to_json_text(const GcnHyper& h, const GcnParams& p) {
  json j;
  j["format_version"] = 1;
  j["hyper"] = {{"d", h.d},
                {"transitions", h.transitions},
                {"out_hidden", h.out_hidden},
                {"lr", h.lr},
                {"epochs", h.epochs},
                {"seed", h.seed},
                {"attention", h.attention},
                {"literal_loops", h.literal_loops}};
  json params = json::object();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto& m = p.values[i];
    json data = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
    params[p.names[i]] = {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
  }
  j["params"] = std::move(params);
  return j.dump() + "\n";
}

std::pair<GcnHyper, GcnParams> model_from_json_text(const std::string& text) {
  GcnHyper h;
  GcnParams p;
  try {
    const json j = json::parse(text);
    if (j.at("format_version").get<int>() != 1) throw ParseError("unsupported model format version");
    const auto& hy = j.at("hyper");
    h.d = hy.at("d").get<int>();
    h.transitions = hy.at("transitions").get<int>();
    h.out_hidden = hy.at("out_hidden").get<int>();
    h.lr = hy.at("lr").get<double>();
    h.epochs = hy.at("epochs").get<int>();
    h.seed = hy.at("seed").get<std::uint64_t>();
    h.attention = hy.at("attention").get<bool>();
    h.literal_loops = hy.at("literal_loops").get<bool>();
    try {
      validate(h);
    } catch (const std::invalid_argument& e) {
      throw ParseError(std::string("model hyper-parameters: ") + e.what());
    }
    const auto& params = j.at("params");
    for (const auto& s : shapes(h)) {
      if (!params.contains(s.name)) throw ParseError("model is missing parameter '" + s.name + "'");
      const auto& e = params.at(s.name);
      const int rows = e.at("rows").get<int>(), cols = e.at("cols").get<int>();
      const auto& data = e.at("data");
      if (rows != s.rows || cols != s.cols || static_cast<int>(data.size()) != rows * cols)
        throw ParseError("parameter '" + s.name + "' has dimension " + std::to_string(rows) + "x" +
                         std::to_string(cols) + ", expected " + std::to_string(s.rows) + "x" + std::to_string(s.cols));
      Eigen::MatrixXd m(rows, cols);
      for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) m(r, c) = data[static_cast<std::size_t>(r * cols + c)].get<double>();
      p.names.push_back(s.name);
      p.values.push_back(std::move(m));
    }
    if (params.size() != p.size()) throw ParseError("model has unexpected parameters");
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model file: ") + e.what());
  }
  return {h, p};
}

}  // namespace mipgcn
