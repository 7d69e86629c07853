#include "mipgcn/pipeline.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>

namespace fs = std::filesystem;

int main(int argc, char** argv) {
  CLI::App app{"Solution prediction for mixed integer programs: dataset, labels, GCN training and solving"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::string workdir = ".";
  std::optional<int> jobs;
  std::optional<double> scale;
  std::string mode = "baseline";

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "experiment config (sectioned key = value)")->required();
    sub->add_option("--workdir", workdir, "directory holding all stage outputs");
    sub->add_option("--jobs", jobs, "worker threads for per-instance work")->check(CLI::PositiveNumber);
    sub->add_option("--scale", scale, "multiplier on the train/valid/test counts")->check(CLI::PositiveNumber);
  };
  struct Stage {
    const char* name;
    const char* help;
  };
  const Stage stages[] = {
      {"gen", "generate train/valid/test instances"},
      {"label", "proximity-search labels for every instance"},
      {"featurize", "root LP features, trigraphs and the train-fit scaler"},
      {"train", "train the GCN on the training graphs"},
      {"predict", "write predictions for validation and test instances"},
      {"gridsearch", "tune phi and eta on the validation set"},
      {"run", "solve the test instances"},
      {"eval", "AP, gaps and accuracy curve; writes report.json and report.csv"},
      {"all", "every stage in order, all run modes"},
  };
  for (const auto& s : stages) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    common(sub);
    if (std::string(s.name) == "run")
      sub->add_option("--mode", mode, "approx, exact or baseline")
          ->check(CLI::IsMember({"approx", "exact", "baseline"}));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : mipgcn::PipelineError::InvalidConfig;
  }

  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    mipgcn::ExperimentConfig cfg = mipgcn::load_config(config_path);
    if (jobs) cfg.jobs = *jobs;
    if (scale) cfg.scale = *scale;
    const fs::path w = workdir;
    if (cmd == "gen") mipgcn::cmd_gen(cfg, w);
    else if (cmd == "label") mipgcn::cmd_label(cfg, w);
    else if (cmd == "featurize") mipgcn::cmd_featurize(cfg, w);
    else if (cmd == "train") mipgcn::cmd_train(cfg, w);
    else if (cmd == "predict") mipgcn::cmd_predict(cfg, w);
    else if (cmd == "gridsearch") mipgcn::cmd_gridsearch(cfg, w);
    else if (cmd == "run") mipgcn::cmd_run(cfg, w, mode);
    else if (cmd == "eval") mipgcn::cmd_eval(cfg, w);
    else mipgcn::cmd_all(cfg, w);
  } catch (const mipgcn::PipelineError& e) {
    fmt::print(stderr, "{}: {}\n", cmd, e.what());
    return e.code();
  } catch (const std::exception& e) {
    fmt::print(stderr, "{}: {}\n", cmd, e.what());
    return mipgcn::PipelineError::RuntimeFailure;
  }
  return 0;
}
