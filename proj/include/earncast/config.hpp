#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "earncast/backtest.hpp"
#include "earncast/synth.hpp"

namespace earncast {

/// Everything one experiment needs. Relative paths resolve against base_dir.
struct ExperimentConfig {
  std::filesystem::path base_dir = ".";

  std::filesystem::path schema = "data/schema.csv";
  std::filesystem::path panel = "data/panel.csv";
  /// Empty: no company attributes, every filter rule passes.
  std::filesystem::path companies = "data/companies.csv";
  /// Empty or absent file: consensus metrics are reported as unavailable.
  std::filesystem::path consensus = "data/consensus.csv";
  std::filesystem::path output_dir = "results";
  std::filesystem::path synth_output_dir = "data";

  SignalSpec synth;
  FilterRules filters;
  PipelineConfig pipeline;
  int train_len = 80;
  int subset_start = 1;
  std::optional<int> max_subsets;
  int jobs = 1;
  bool save_models = true;

  std::filesystem::path resolve(const std::filesystem::path& p) const;
  /// Throws Error(kInvalidConfig) naming the first bad field.
  void validate() const;
};

/// Applies one `key = value` setting. Throws Error(kInvalidConfig).
void apply_setting(ExperimentConfig& config, std::string_view key, std::string_view value);

/// Line format: `key = value`, `#` starts a comment, blank lines ignored.
ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = ".");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Every effective setting in a fixed order; parse_config of these lines
/// gives back the same configuration.
std::vector<std::pair<std::string, std::string>> config_echo(const ExperimentConfig& config);
void write_config(const ExperimentConfig& config, std::ostream& out);

}  // namespace earncast
