#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "earncast/backtest.hpp"
#include "earncast/config.hpp"

namespace earncast {

/// Writes the synthetic panel files into config.synth_output_dir and
/// returns that directory.
std::filesystem::path cmd_synth(const ExperimentConfig& config);

/// Loads schema, panel and the optional companies/consensus files, applies
/// filters and alignment, and converts formats.
PipelineInputs load_inputs(const ExperimentConfig& config);

/// The subsets selected by train_len, subset_start and max_subsets.
std::vector<SubsetSplit> select_subsets(const ExperimentConfig& config, const PipelineInputs& inputs);

struct BacktestOutput {
  std::filesystem::path dir;
  std::vector<SubsetRecord> records;
};

/// Writes report.jsonl, report.txt, config.txt and per-subset artifacts
/// (subsets/NNN/{model.txt,pca.txt,fill.jsonl,trials.jsonl}) into
/// config.output_dir.
BacktestOutput cmd_backtest(const ExperimentConfig& config,
                            const std::function<void(const SubsetResult&)>& on_done = {});

/// Re-renders report.txt from results_dir/report.jsonl and returns the text.
std::string cmd_report(const std::filesystem::path& results_dir);

}  // namespace earncast
