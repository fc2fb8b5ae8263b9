// Small pipeline fixtures shared by the harness tests and the acceptance run.
#pragma once

#include "earncast/backtest.hpp"
#include "earncast/synth.hpp"

#include <string>

namespace testutil {

inline earncast::SignalSpec small_spec(std::uint64_t seed = 3) {
  earncast::SignalSpec s;
  s.n_companies = 40;
  s.n_quarters = 36;
  s.n_filler_variables = 2;
  s.seed = seed;
  s.filtered_share = 0.0;
  return s;
}

/// Cheap settings: 4-quarter look-back for lags and sample deletion, a two-trial search over a box that
/// fits a few hundred rows.
inline earncast::PipelineConfig small_pipeline() {
  using namespace earncast;
  PipelineConfig c;
  c.n_lags = 4;
  c.impute.lookback = 4;
  c.validation_size = 3;
  c.search_budget = 2;
  c.pca_threshold = 0.75;
  c.standardize = true;
  c.space.ranges = {{"learning_rate", 0.1, 0.3, Scale::kLinear},
                    {"num_leaves", 4, 12, Scale::kInteger},
                    {"min_data_in_leaf", 5, 20, Scale::kInteger}};
  c.base_params.n_rounds = 25;
  c.base_params.max_bin = 32;
  c.early_stopping_rounds = 5;
  c.seed = 11;
  return c;
}

inline earncast::PipelineInputs inputs_for(const earncast::SyntheticData& data) {
  return earncast::prepare_inputs(data.schema, data.panel, earncast::FilterRules{},
                                  earncast::FormulaVariant::kStandard, data.consensus);
}

}  // namespace testutil

namespace testutil {

/// Config file text for a small end-to-end run; data and results live under
/// the config's directory.
inline std::string small_config_text(int max_subsets = 2) {
  return "# small end-to-end run\n"
         "synth.n_companies = 40\n"
         "synth.n_quarters = 36\n"
         "synth.n_filler_variables = 2\n"
         "synth.filtered_share = 0.05\n"
         "synth.seed = 3\n"
         "n_lags = 4\n"
         "impute.lookback = 4\n"
         "train_len = 24\n"
         "max_subsets = " +
         std::to_string(max_subsets) +
         "\n"
         "validation.size = 3\n"
         "search.budget = 2\n"
         "search.space = empty\n"
         "search.space.learning_rate = 0.1,0.3,linear\n"
         "search.space.num_leaves = 4,12,integer\n"
         "gbdt.n_rounds = 25\n"
         "gbdt.max_bin = 32\n"
         "gbdt.min_data_in_leaf = 10\n"
         "gbdt.early_stopping_rounds = 5\n"
         "standardize = true\n"
         "pca_threshold = 0.75\n"
         "seed = 11\n";
}

}  // namespace testutil
