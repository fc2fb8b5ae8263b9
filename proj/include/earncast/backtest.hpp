#pragma once

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "earncast/consensus.hpp"
#include "earncast/features.hpp"
#include "earncast/gbdt.hpp"
#include "earncast/pca.hpp"
#include "earncast/tuner.hpp"

namespace earncast {

struct SubsetSplit {
  int index = 1;  // 1-based
  std::vector<CalendarQuarter> train_quarters;
  CalendarQuarter test_quarter;

  CalendarQuarter first_train() const { return train_quarters.front(); }
  CalendarQuarter last_train() const { return train_quarters.back(); }
};

/// One split per feasible test quarter, sliding by one. Throws
/// Error(kInsufficientHistory) with fewer than train_len + 1 quarters.
std::vector<SubsetSplit> enumerate_subsets(std::span<const CalendarQuarter> quarters, int train_len = 80);

enum class ConsensusPairing {
  kNonGaap,  // consensus scored against non-GAAP actual classes
  kGaap,     // against the model's own labels
};

ConsensusPairing parse_consensus_pairing(std::string_view text);
const char* to_string(ConsensusPairing pairing);

struct PipelineConfig {
  LabelSpec label;
  FormulaVariant variant = FormulaVariant::kStandard;
  double clip_pct = 0.95;
  ImputeOptions impute;
  int n_lags = 20;
  double correlation_cutoff = 0.9;
  double pca_threshold = 0.66;
  bool standardize = false;
  int validation_size = 8;
  ValidationMode validation_mode = ValidationMode::kChronologicalTail;
  SearchSpace space = SearchSpace::default_box();
  int search_budget = 25;
  SearchMode search_mode = SearchMode::kRandom;
  /// Values for fields outside the search space.
  HyperParams base_params;
  int early_stopping_rounds = 20;
  /// Drop training rows whose label window reaches past the test quarter.
  bool purge_overlap = true;
  ConsensusPairing consensus_actual = ConsensusPairing::kNonGaap;
  int top_components = 5;
  int top_variables = 10;
  std::uint64_t seed = 0;
};

/// Panel after filters and alignment, plus its lag-0 converted features.
struct PipelineInputs {
  RawPanel panel;
  FeatureMatrix features;
  std::optional<ConsensusTable> consensus;
};

PipelineInputs prepare_inputs(const Schema& schema, const RawPanel& raw, const FilterRules& filters,
                              FormulaVariant variant, std::optional<ConsensusTable> consensus = std::nullopt);

struct ConditionalMetrics {
  std::optional<double> converge_model_acc;
  std::optional<double> converge_consensus_acc;
  std::optional<double> diverge_model_acc;
  std::optional<double> diverge_consensus_acc;
  std::optional<double> total_model_acc;
  std::optional<double> total_consensus_acc;
  std::size_t n_converge = 0;
  std::size_t n_diverge = 0;
  std::size_t converge_model_correct = 0;
  std::size_t converge_consensus_correct = 0;
  std::size_t diverge_model_correct = 0;
  std::size_t diverge_consensus_correct = 0;
};

/// Rows where any input is absent are skipped.
ConditionalMetrics conditional_accuracy(std::span<const std::optional<int>> model_pred,
                                        std::span<const std::optional<int>> consensus_pred,
                                        std::span<const std::optional<int>> actual);
/// Consensus scored against its own actual (e.g. non-GAAP).
ConditionalMetrics conditional_accuracy(std::span<const std::optional<int>> model_pred,
                                        std::span<const std::optional<int>> consensus_pred,
                                        std::span<const std::optional<int>> model_actual,
                                        std::span<const std::optional<int>> consensus_actual);

struct MetricsBundle {
  std::optional<double> accuracy;
  std::vector<std::optional<double>> per_class;
  std::size_t n_scored = 0;
  std::optional<double> consensus_accuracy;         // mean estimates
  std::optional<double> consensus_median_accuracy;  // median estimates
  std::optional<ConditionalMetrics> conditional;
};

inline constexpr int kLagBuckets = 5;
inline constexpr int kFormatCount = 5;

struct ImportanceDecomposition {
  std::vector<std::size_t> top_components;
  std::vector<double> component_importance;
  /// Per top component, the column names with the largest |loading|.
  std::vector<std::vector<std::string>> top_variables;
  /// [lag bucket 0-3, 4-7, ...][format in Format order]
  std::array<std::array<int, kFormatCount>, kLagBuckets> tally{};
  std::map<std::string, int> variable_counts;

  int total() const;
};

int lag_bucket(int lag);

ImportanceDecomposition decompose_importance(const GbdtModel& model, const PcaModel& pca,
                                             std::span<const FeatureColumnMeta> metas, int top_c = 5,
                                             int top_v = 10);

struct SubsetResult {
  SubsetSplit split;
  HyperParams tuned;
  int best_trial = -1;
  std::vector<TrialRecord> trials;
  std::size_t train_rows = 0;
  std::size_t lagged_columns = 0;
  std::size_t deduped_columns = 0;
  std::size_t pca_kept = 0;
  FillReport fill;
  std::vector<PanelKey> test_keys;
  std::vector<int> predictions;
  std::vector<std::optional<int>> labels;
  MetricsBundle metrics;
  ImportanceDecomposition importance;
  GbdtModel model;
  PcaModel pca;
  std::string note;
};

SubsetResult run_subset(const SubsetSplit& split, const PipelineInputs& inputs, const PipelineConfig& config);

/// Runs the splits on `jobs` threads; results come back in split order.
/// Stage errors are rethrown with the subset index in the message.
std::vector<SubsetResult> run_backtest(std::span<const SubsetSplit> splits, const PipelineInputs& inputs,
                                       const PipelineConfig& config, int jobs = 1,
                                       const std::function<void(const SubsetResult&)>& on_done = {});

/// What report.jsonl keeps of a subset.
struct SubsetRecord {
  int index = 0;
  CalendarQuarter first_train;
  CalendarQuarter last_train;
  CalendarQuarter test_quarter;
  Horizon horizon = Horizon::kQoQ;
  LabelScheme scheme = LabelScheme::kQuantileRank;
  int n_classes = 3;
  std::size_t n_test = 0;
  std::size_t train_rows = 0;
  std::size_t lagged_columns = 0;
  std::size_t deduped_columns = 0;
  std::size_t pca_kept = 0;
  MetricsBundle metrics;
  HyperParams tuned;
  int best_iteration = 0;
  ImportanceDecomposition importance;
  std::vector<std::pair<std::string, std::string>> config;
  std::string note;
};

SubsetRecord make_record(const SubsetResult& result, const PipelineConfig& config,
                         std::vector<std::pair<std::string, std::string>> config_echo);
std::string record_to_json(const SubsetRecord& record);
/// Throws Error(kParse) naming line_no.
SubsetRecord record_from_json(std::string_view line, std::size_t line_no);
std::vector<SubsetRecord> read_records(std::istream& in);

struct ConfigSummary {
  Horizon horizon = Horizon::kQoQ;
  LabelScheme scheme = LabelScheme::kQuantileRank;
  int n_classes = 3;
  std::size_t subsets = 0;
  std::size_t scored_subsets = 0;
  std::optional<double> mean_accuracy;
  std::optional<double> mean_consensus_accuracy;
  std::optional<double> mean_consensus_median_accuracy;
  ConditionalMetrics conditional;  // pooled counts
  std::vector<std::pair<CalendarQuarter, std::optional<double>>> series;
  std::array<std::array<int, kFormatCount>, kLagBuckets> tally{};
  std::map<std::string, int> variable_counts;
};

struct Report {
  std::vector<ConfigSummary> configs;
};

Report aggregate_report(std::span<const SubsetRecord> records);
std::string render_report(const Report& report);

}  // namespace earncast
