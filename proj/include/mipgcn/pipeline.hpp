#pragma once

#include "mipgcn/gcn.hpp"
#include "mipgcn/generators.hpp"
#include "mipgcn/labeler.hpp"

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace mipgcn {

/// Failure of a pipeline stage, carrying the process exit code.
class PipelineError : public std::runtime_error {
 public:
  enum Code { MissingInput = 2, InvalidConfig = 3, RuntimeFailure = 4 };
  PipelineError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

struct ExperimentConfig {
  ProblemType problem = ProblemType::SC;
  std::string preset = "tiny";
  GenParams params;
  /// Split sizes before scaling.
  int train = 140, valid = 20, test = 40;
  double scale = 1.0;
  std::uint64_t seed = 0;
  int jobs = 1;
  LabelConfig label;
  GcnHyper gcn;
  std::vector<int> phi_grid = {0, 5, 10, 15, 20};
  std::vector<double> eta_grid = {0.8, 0.9, 0.95, 0.99, 1.0};
  double grid_time_limit_s = 5.0;
  double run_time_limit_s = 60.0;
  double reference_time_limit_s = 60.0;
  long node_limit = 10'000'000;
  std::vector<double> fractions = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};

  int count(int base) const;
};

/// Sectioned key = value file. Unknown keys and malformed values raise
/// PipelineError::InvalidConfig.
ExperimentConfig config_from_ini_text(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

inline const std::vector<std::string> kSplits = {"train", "valid", "test"};

void cmd_gen(const ExperimentConfig& cfg, const std::filesystem::path& workdir);
void cmd_label(const ExperimentConfig& cfg, const std::filesystem::path& workdir);
void cmd_featurize(const ExperimentConfig& cfg, const std::filesystem::path& workdir);
void cmd_train(const ExperimentConfig& cfg, const std::filesystem::path& workdir);
void cmd_predict(const ExperimentConfig& cfg, const std::filesystem::path& workdir);
void cmd_gridsearch(const ExperimentConfig& cfg, const std::filesystem::path& workdir);
/// mode is "approx", "exact" or "baseline".
void cmd_run(const ExperimentConfig& cfg, const std::filesystem::path& workdir, const std::string& mode);
void cmd_eval(const ExperimentConfig& cfg, const std::filesystem::path& workdir);
/// Every stage in order, all three run modes included.
void cmd_all(const ExperimentConfig& cfg, const std::filesystem::path& workdir);

}  // namespace mipgcn
