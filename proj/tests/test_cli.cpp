#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <cstdlib>
#include <sstream>
#include <unistd.h>

#include "spectra/errors.hpp"
#include "spectra/experiment.hpp"

using namespace spectra;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("spectra-test-" + std::to_string(Rng(::getpid()).next() % 1000000));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config schema validation") {
  json base{{"experiment", "spectrum"}, {"n", 50}, {"d", 2.0}, {"seed", 1}};
  CHECK_NOTHROW(ExperimentConfig::from_json(base));

  json bad = base;
  bad["unknown_field"] = 1;
  CHECK_THROWS_WITH_AS(ExperimentConfig::from_json(bad),
                       "config: unknown field 'unknown_field'", invalid_parameter);

  json bad2 = base;
  bad2["d"] = "four";
  CHECK_THROWS_AS(ExperimentConfig::from_json(bad2), invalid_parameter);

  json bad3 = base;
  bad3["z"] = {1.0};
  CHECK_THROWS_AS(ExperimentConfig::from_json(bad3), invalid_parameter);

  json bad4{{"n", 10}};  // missing experiment
  CHECK_THROWS_AS(ExperimentConfig::from_json(bad4), invalid_parameter);
}

TEST_CASE("config hash is independent of jobs and output directory") {
  ExperimentConfig a = ExperimentConfig::defaults_for("spectrum");
  ExperimentConfig b = a;
  b.jobs = 8;
  b.out_dir = "elsewhere";
  CHECK(a.config_hash() == b.config_hash());
  b.model.seed = 99;
  CHECK(a.config_hash() != b.config_hash());
}

TEST_CASE("spectrum experiment: artifacts, cardinality, metadata") {
  TempDir tmp;
  ExperimentConfig cfg = ExperimentConfig::defaults_for("spectrum");
  cfg.model.n = 200;
  cfg.out_dir = (tmp.path / "out").string();
  int rc = run_experiment(cfg);
  CHECK(rc == 0);

  std::string csv = slurp(fs::path(cfg.out_dir) / "eigenvalues.csv");
  // metadata header lines, then one row per eigenvalue
  CHECK(csv.find("# config_hash=") != std::string::npos);
  CHECK(csv.find("# seed=") != std::string::npos);
  CHECK(csv.find("\r") == std::string::npos);  // LF endings
  int rows = 0;
  std::istringstream is(csv);
  std::string line;
  bool header_seen = false;
  while (std::getline(is, line)) {
    if (line.rfind("#", 0) == 0) continue;
    if (!header_seen) {
      CHECK(line == "re,im,weight");
      header_seen = true;
      continue;
    }
    ++rows;
  }
  CHECK(rows == 200);

  std::string svg = slurp(fs::path(cfg.out_dir) / "spectrum.svg");
  int points = 0;
  for (size_t pos = 0; (pos = svg.find("<circle", pos)) != std::string::npos; ++pos)
    ++points;
  CHECK(points == 201);  // 200 eigenvalues + the disk overlay

  CHECK(fs::exists(fs::path(cfg.out_dir) / "manifest.json"));
}

TEST_CASE("verify-linear-algebra defaults to exit 0") {
  TempDir tmp;
  ExperimentConfig cfg = ExperimentConfig::defaults_for("verify-linear-algebra");
  cfg.out_dir = (tmp.path / "verify").string();
  CHECK(run_experiment(cfg) == 0);
}

TEST_CASE("replay reproduces digests and detects changes") {
  TempDir tmp;
  ExperimentConfig cfg = ExperimentConfig::defaults_for("subcritical");
  cfg.model.n = 150;
  cfg.trials = 5;
  cfg.out_dir = (tmp.path / "run").string();
  REQUIRE(run_experiment(cfg) == 0);
  std::string manifest = (fs::path(cfg.out_dir) / "manifest.json").string();

  CHECK(replay(manifest, 1) == 0);
  CHECK(replay(manifest, 8) == 0);  // parallel widths agree byte for byte

  // a changed seed must diff
  json m = json::parse(slurp(manifest));
  m["config"]["seed"] = 4242;
  {
    std::ofstream out(manifest, std::ios::binary);
    out << m.dump(2) << "\n";
  }
  CHECK(replay(manifest, 1) == 5);

  // version mismatch refuses to compare
  m["version"] = "0.0.0";
  {
    std::ofstream out(manifest, std::ios::binary);
    out << m.dump(2) << "\n";
  }
  CHECK(replay(manifest, 1) == 4);
}

TEST_CASE("subcritical experiment satisfies its own assertions") {
  TempDir tmp;
  ExperimentConfig cfg = ExperimentConfig::defaults_for("subcritical");
  cfg.model.n = 300;
  cfg.trials = 10;
  cfg.jobs = 2;
  cfg.out_dir = (tmp.path / "sub").string();
  CHECK(run_experiment(cfg) == 0);
  json body = json::parse(slurp(fs::path(cfg.out_dir) / "subcritical.json"));
  CHECK(body["zero_ge_trivial_every_trial"].get<bool>());
  CHECK(body["mean_zero_fraction"].get<double>() >=
        body["mean_trivial_image_fraction"].get<double>() - 1e-12);
}

TEST_CASE("parallel widths produce identical artifacts directly") {
  TempDir tmp;
  for (int jobs : {1, 8}) {
    ExperimentConfig cfg = ExperimentConfig::defaults_for("subcritical");
    cfg.model.n = 250;
    cfg.trials = 8;
    cfg.jobs = jobs;
    cfg.out_dir = (tmp.path / ("w" + std::to_string(jobs))).string();
    REQUIRE(run_experiment(cfg) == 0);
  }
  for (const char* name : {"subcritical.csv", "subcritical.json"}) {
    CHECK(file_digest((tmp.path / "w1" / name).string()) ==
          file_digest((tmp.path / "w8" / name).string()));
  }
}

TEST_CASE("format_double round trips bit-exactly") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(-1.0) == "-1");
  for (double x : {1e-300, 3.141592653589793, -2.5e17, 0.0}) {
    CHECK(std::strtod(format_double(x).c_str(), nullptr) == x);
  }
}
