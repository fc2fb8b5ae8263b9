// earncast: synth | backtest | report
#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "earncast/commands.hpp"
#include "earncast/error.hpp"

namespace {

struct Common {
  std::string config_path;
  std::optional<int> jobs;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> settings;
};

earncast::ExperimentConfig load(const Common& c, const char* seed_key) {
  earncast::ExperimentConfig config;
  if (!c.config_path.empty()) config = earncast::load_config(c.config_path);
  for (const auto& s : c.settings) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      throw earncast::Error(earncast::ErrorKind::kInvalidConfig, "--set expects key=value, got '" + s + "'");
    }
    earncast::apply_setting(config, s.substr(0, eq), s.substr(eq + 1));
  }
  if (c.seed) earncast::apply_setting(config, seed_key, std::to_string(*c.seed));
  if (c.jobs) config.jobs = *c.jobs;
  config.validate();
  return config;
}

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "Experiment config file")->check(CLI::ExistingFile);
  cmd->add_option("--set", c.settings, "Override one setting, key=value (repeatable)");
  cmd->add_option("--seed", c.seed, "Override the seed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quarterly earnings direction forecasting: synthetic data, rolling backtest, reports"};
  app.require_subcommand(1);

  Common synth_opts, backtest_opts, report_opts;
  std::string results_dir;
  bool quiet = false;

  auto* synth = app.add_subcommand("synth", "Write a synthetic panel");
  add_common(synth, synth_opts);

  auto* backtest = app.add_subcommand("backtest", "Run the pipeline over rolling subsets");
  add_common(backtest, backtest_opts);
  backtest->add_option("--jobs", backtest_opts.jobs, "Subsets run in parallel")->check(CLI::PositiveNumber);
  backtest->add_flag("--quiet", quiet, "No per-subset progress");

  auto* report = app.add_subcommand("report", "Re-render tables from stored records");
  report->add_option("--config", report_opts.config_path, "Experiment config file")->check(CLI::ExistingFile);
  report->add_option("--results", results_dir, "Results directory (default: output_dir of the config)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      const auto config = load(synth_opts, "synth.seed");
      const auto dir = earncast::cmd_synth(config);
      std::cout << "wrote synthetic panel to " << dir.string() << '\n';
    } else if (backtest->parsed()) {
      const auto config = load(backtest_opts, "seed");
      auto progress = [&](const earncast::SubsetResult& r) {
        if (quiet) return;
        const auto& acc = r.metrics.accuracy;
        std::fprintf(stderr, "subset %d (%s): accuracy %s, %zu components\n", r.split.index,
                     r.split.test_quarter.to_string().c_str(),
                     acc ? std::to_string(*acc).c_str() : "n/a", r.pca_kept);
      };
      const auto out = earncast::cmd_backtest(config, progress);
      std::cout << "wrote " << out.records.size() << " subset records to " << out.dir.string() << '\n';
    } else if (report->parsed()) {
      std::filesystem::path dir = results_dir;
      if (dir.empty()) {
        const auto config = load(report_opts, "seed");
        dir = config.resolve(config.output_dir);
      }
      std::cout << earncast::cmd_report(dir);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
