#include <cstdio>
#include <fstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "spectra/errors.hpp"
#include "spectra/experiment.hpp"
#include "spectra/version.hpp"

using spectra::ExperimentConfig;

int main(int argc, char** argv) {
  CLI::App app{"sparse-spectra: numerical laboratory for sparse iid spectral laws"};
  app.set_version_flag("--version", spectra::kVersion);
  app.require_subcommand(1);

  std::string config_path, out_dir;
  long long seed = -1;
  int jobs = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file");
    sub->add_option("--seed", seed, "override the RNG seed");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--jobs", jobs, "parallel trial workers");
  };

  for (const char* name : spectra::kExperiments) add_common(app.add_subcommand(name));

  auto* rep = app.add_subcommand("replay", "re-run a manifest and compare digests");
  std::string manifest;
  rep->add_option("manifest", manifest, "path to manifest.json")->required();
  rep->add_option("--jobs", jobs, "parallel trial workers");

  CLI11_PARSE(app, argc, argv);

  auto* sub = app.get_subcommands().front();
  if (sub->get_name() == "replay") {
    return spectra::replay(manifest, jobs);
  }

  ExperimentConfig cfg;
  try {
    if (!config_path.empty()) {
      std::ifstream in(config_path, std::ios::binary);
      if (!in) {
        std::fprintf(stderr, "error: cannot open config %s\n", config_path.c_str());
        return 1;
      }
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(in);
      } catch (const nlohmann::json::parse_error& e) {
        std::fprintf(stderr, "error: config parse failed: %s\n", e.what());
        return 1;
      }
      cfg = ExperimentConfig::from_json(j);
      if (cfg.experiment != sub->get_name()) {
        std::fprintf(stderr,
                     "error: config experiment '%s' does not match subcommand '%s'\n",
                     cfg.experiment.c_str(), sub->get_name().c_str());
        return 1;
      }
    } else {
      cfg = ExperimentConfig::defaults_for(sub->get_name());
    }
    if (seed >= 0) cfg.model.seed = static_cast<std::uint64_t>(seed);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (jobs > 0) cfg.jobs = jobs;
  } catch (const spectra::invalid_parameter& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }

  try {
    return spectra::run_experiment(cfg);
  } catch (const spectra::invalid_parameter& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
