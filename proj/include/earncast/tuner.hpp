#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "earncast/gbdt.hpp"
#include "earncast/quarter.hpp"
#include "earncast/rng.hpp"

namespace earncast {

enum class ValidationMode { kChronologicalTail, kRandomQuarters };

ValidationMode parse_validation_mode(std::string_view text);
const char* to_string(ValidationMode mode);

struct ValidationSplit {
  /// Indices into the key list passed to make_validation_split.
  std::vector<std::size_t> train;
  std::vector<std::size_t> valid;
  std::vector<CalendarQuarter> valid_quarters;
};

/// Holds out size_quarters whole calendar quarters of the training window.
ValidationSplit make_validation_split(std::span<const PanelKey> keys, int size_quarters, ValidationMode mode,
                                      std::uint64_t seed);

enum class Scale { kLinear, kLog, kInteger };

struct ParamRange {
  std::string name;
  double min = 0.0;
  double max = 0.0;
  Scale scale = Scale::kLinear;
  bool operator==(const ParamRange&) const = default;
};

/// Searchable fields of HyperParams by name.
double get_param(const HyperParams& params, std::string_view name);
void set_param(HyperParams& params, std::string_view name, double value);
bool is_tunable_param(std::string_view name);

struct SearchSpace {
  std::vector<ParamRange> ranges;

  /// learning_rate 0.6-1, max_bin 127-255, num_leaves 50-200,
  /// min_data_in_leaf 500-1400, feature_fraction 0.3-0.8,
  /// bagging_fraction 0.4-0.8, bagging_freq 2-8, min_gain_to_split 0.5-0.72,
  /// lambda_l1 1-20, lambda_l2 350-450.
  static SearchSpace default_box();

  ParamRange* find(std::string_view name);
  /// Throws Error(kInvalidParams) on min > max or an unknown name.
  void validate() const;
  HyperParams sample(Rng& rng, const HyperParams& base) const;
  bool contains(const HyperParams& params) const;
};

struct TrialOutcome {
  double validation_metric = 0.0;
  double train_metric = 0.0;
  int best_iteration = 0;
};

struct TrialRecord {
  int index = 0;
  HyperParams params;
  std::optional<double> validation_metric;
  std::optional<double> train_metric;
  int best_iteration = 0;
  double wall_time = 0.0;
  std::string error;
};

enum class SearchMode { kRandom, kAdaptive };

SearchMode parse_search_mode(std::string_view text);
const char* to_string(SearchMode mode);

struct SearchOptions {
  int budget = 25;
  std::uint64_t seed = 0;
  SearchMode mode = SearchMode::kRandom;
  /// Fields not in the space keep these values.
  HyperParams base;
};

struct SearchResult {
  HyperParams best;
  int best_trial = -1;
  std::vector<TrialRecord> trials;
};

using Objective = std::function<TrialOutcome(const HyperParams&)>;

/// Evaluates budget sampled parameter vectors; the highest validation metric
/// wins, ties going to the earliest trial. Failed trials are recorded;
/// Error(kAllTrialsFailed) when none succeeds.
SearchResult search(const SearchSpace& space, const Objective& objective, const SearchOptions& options);

/// Ranges narrowed to the span of the top quarter of successful trials.
SearchSpace refit_space(const SearchSpace& space, std::span<const TrialRecord> trials);

void write_trials(std::span<const TrialRecord> trials, std::ostream& out);

}  // namespace earncast
