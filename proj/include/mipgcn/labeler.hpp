#pragma once

#include "mipgcn/bnb.hpp"
#include "mipgcn/mip.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mipgcn {

enum class Label { Stable0, Stable1, Unstable };

const char* to_string(Label l);
Label label_from_string(const std::string& s);

struct LabelSet {
  /// Binary variable indices, aligned with `labels`.
  std::vector<int> vars;
  std::vector<Label> labels;
  /// x-bar^0 ... x-bar^{K-1}, objectives in the original sense.
  std::vector<Solution> solutions;
  double delta = 0.0;
  int iterations = 0;
};

struct LabelConfig {
  int max_iters = 40;
  double base_time_limit_s = 5.0;
  int max_doublings = 5;
  /// "proximity" (the shipped pipeline) or "optimal" (one optimal solution; tiny instances only).
  std::string mode = "proximity";
};

/// First feasible point from branch and bound; the time limit doubles on each
/// failed attempt. Throws std::runtime_error when nothing is found.
Solution initial_solution(const MipInstance& inst, double base_time_limit_s, int max_doublings = 5);

/// Auxiliary MIP: Hamming distance to x_bar over the binaries, the original
/// rows, and an objective cutoff requiring improvement by at least delta.
MipInstance proximity_instance(const MipInstance& inst, const Solution& x_bar, double delta);

/// Throws std::invalid_argument for delta <= 0 or an infeasible x_bar.
std::optional<Solution> proximity_step(const MipInstance& inst, const Solution& x_bar, double delta,
                                       double time_limit_s = 5.0);

std::vector<Label> stability_labels(const std::vector<int>& vars, const std::vector<Solution>& solutions);

LabelSet generate_labels(const MipInstance& inst, const LabelConfig& cfg = {});

std::string labels_to_json_text(const MipInstance& inst, const LabelSet& labels);

/// Label file as stored on disk.
struct LabelFile {
  std::string instance;
  double delta = 0.0;
  int iterations = 0;
  std::vector<std::pair<std::string, Label>> labels;
  std::vector<double> trace;
};

LabelFile label_file_from_json_text(const std::string& text);

}  // namespace mipgcn
