#pragma once

#include "mipgcn/labeler.hpp"
#include "mipgcn/trigraph.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace mipgcn {

struct GcnHyper {
  int d = 64;
  int transitions = 2;
  int out_hidden = 64;
  double lr = 1e-3;
  int epochs = 200;
  std::uint64_t seed = 0;
  bool attention = true;
  /// Sequential per-node objective updates exactly as in the pseudocode; the
  /// default replaces them with one update from the mean embedding.
  bool literal_loops = false;
};

/// Named parameter matrices in a fixed order. Biases are d x 1 columns.
struct GcnParams {
  std::vector<std::string> names;
  std::vector<Eigen::MatrixXd> values;

  int index(const std::string& name) const;
  const Eigen::MatrixXd& at(const std::string& name) const { return values[index(name)]; }
  Eigen::MatrixXd& at(const std::string& name) { return values[index(name)]; }
  std::size_t size() const { return names.size(); }
};

void validate(const GcnHyper& h);

GcnParams init_params(const GcnHyper& h, std::uint64_t seed);

/// z_v in (0,1) for each variable node, in node order.
Eigen::VectorXd forward(const TriGraph& g, const GcnParams& p, const GcnHyper& h);

/// Targets per variable node: 1 Stable1, 0 Stable0, -1 Unstable (ignored).
std::vector<int> label_targets(const std::vector<Label>& labels);

/// Labels aligned with the graph's variable nodes by name. Throws ParseError
/// when a node has no label.
std::vector<Label> align_labels(const TriGraph& g, const LabelFile& labels);

double bce_loss(const Eigen::VectorXd& z, const std::vector<Label>& labels);

struct GradientResult {
  double loss = 0.0;
  /// Same names and shapes as the parameters.
  GcnParams grads;
};

GradientResult gradients(const TriGraph& g, const GcnParams& p, const GcnHyper& h, const std::vector<Label>& labels);

struct TrainResult {
  GcnParams params;
  /// Mean training loss per epoch, measured on each graph before its update.
  std::vector<double> history;
};

using TrainingSet = std::vector<std::pair<TriGraph, std::vector<Label>>>;

TrainResult train(const TrainingSet& data, const GcnHyper& h);
/// Continues from given parameters.
TrainResult train(const TrainingSet& data, const GcnHyper& h, GcnParams start);

std::string model_to_json_text(const GcnHyper& h, const GcnParams& p);
std::pair<GcnHyper, GcnParams> model_from_json_text(const std::string& text);

}  // namespace mipgcn
