#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mipgcn/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace mipgcn;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mipgcn_pipeline_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int code_of(auto&& fn) {
  try {
    fn();
  } catch (const PipelineError& e) {
    return e.code();
  }
  return 0;
}

const char* kTinyConfig = R"(
[experiment]
problem = SC
preset = tiny
scale = 0.1
seed = 3

[gcn]
d = 8
out_hidden = 8
epochs = 5

[apply]
phi_grid = 0, 5
eta_grid = 0.9, 1.0
grid_time_limit = 2
run_time_limit = 2
reference_time_limit = 10
)";

}  // namespace

TEST_CASE("config parsing") {
  const ExperimentConfig cfg = config_from_ini_text(kTinyConfig);
  CHECK(cfg.problem == ProblemType::SC);
  CHECK(cfg.seed == 3);
  CHECK(cfg.count(cfg.train) == 14);
  CHECK(cfg.count(cfg.valid) == 2);
  CHECK(cfg.count(cfg.test) == 4);
  CHECK(cfg.gcn.d == 8);
  CHECK(cfg.phi_grid == std::vector<int>{0, 5});
  CHECK(cfg.eta_grid == std::vector<double>{0.9, 1.0});

  const ExperimentConfig def = config_from_ini_text("");
  CHECK(def.count(def.train) == 140);
  CHECK(def.count(def.valid) == 20);
  CHECK(def.count(def.test) == 40);

  CHECK(config_from_ini_text("[experiment]\nscale = 0.001\n").count(140) == 1);
  CHECK(config_from_ini_text("[generator]\nsets = 9\n").params.at("sets") == 9);
}

TEST_CASE("invalid configs exit with code 3") {
  for (const char* text : {"[experiment]\nunknown = 1\n", "[experiment]\nproblem = XYZ\n", "[experiment]\ntrain = 0\n",
                           "[experiment]\nscale = -1\n", "[gcn]\nd = abc\n", "[apply]\neta_grid = 0.5, 1.5\n",
                           "[experiment]\npreset = enormous\n", "[label]\nmode = guess\n", "[gcn]\nattention = maybe\n"}) {
    CAPTURE(text);
    CHECK(code_of([&] { config_from_ini_text(text); }) == PipelineError::InvalidConfig);
  }
  CHECK(code_of([] { load_config("/nonexistent/config.ini"); }) == PipelineError::InvalidConfig);
}

TEST_CASE("missing inputs exit with code 2 and name the directory") {
  const ExperimentConfig cfg = config_from_ini_text(kTinyConfig);
  const fs::path w = fresh_dir("missing");
  try {
    cmd_train(cfg, w);
    FAIL("expected an error");
  } catch (const PipelineError& e) {
    CHECK(e.code() == PipelineError::MissingInput);
    CHECK(std::string(e.what()).find("graphs") != std::string::npos);
  }
  CHECK(code_of([&] { cmd_label(cfg, w); }) == PipelineError::MissingInput);
  CHECK(code_of([&] { cmd_run(cfg, w, "baseline"); }) == PipelineError::MissingInput);
  CHECK(code_of([&] { cmd_run(cfg, w, "sideways"); }) == PipelineError::InvalidConfig);
}

TEST_CASE("gen is byte-identical on rerun") {
  const ExperimentConfig cfg = config_from_ini_text(kTinyConfig);
  const fs::path a = fresh_dir("gen_a"), b = fresh_dir("gen_b");
  cmd_gen(cfg, a);
  cmd_gen(cfg, b);
  int files = 0;
  for (const auto& split : kSplits)
    for (const auto& e : fs::directory_iterator(a / "instances" / split)) {
      ++files;
      CHECK(slurp(e.path()) == slurp(b / "instances" / split / e.path().filename()));
    }
  CHECK(files == 20);
}

TEST_CASE("stages chain and leave earlier outputs untouched") {
  ExperimentConfig cfg = config_from_ini_text(kTinyConfig);
  cfg.jobs = 2;
  const fs::path w = fresh_dir("chain");
  cmd_gen(cfg, w);
  cmd_label(cfg, w);
  const std::string label_before = slurp(w / "labels" / "sc_tiny_train_0000.json");
  cmd_featurize(cfg, w);
  cmd_train(cfg, w);
  cmd_predict(cfg, w);
  CHECK(code_of([&] { cmd_run(cfg, w, "approx"); }) == PipelineError::MissingInput);
  cmd_gridsearch(cfg, w);
  for (const char* m : {"baseline", "approx", "exact"}) cmd_run(cfg, w, m);
  cmd_eval(cfg, w);
  CHECK(slurp(w / "labels" / "sc_tiny_train_0000.json") == label_before);
  for (const char* f : {"scaler.json", "model.json", "history.csv", "tuned.json", "report.json", "report.csv", "curve.csv",
                        "timings.csv", "results/approx.csv"})
    CHECK(fs::exists(w / f));
  const std::string history = slurp(w / "history.csv");
  CHECK(history.rfind("epoch,loss\n", 0) == 0);
  CHECK(std::count(history.begin(), history.end(), '\n') == 6);
  const std::string pred = slurp(w / "predictions" / "sc_tiny_test_0000.csv");
  CHECK(pred.rfind("varname,z\n", 0) == 0);
  const std::string report = slurp(w / "report.csv");
  CHECK(std::count(report.begin(), report.end(), '\n') == 1 + 4 * 3);
}
