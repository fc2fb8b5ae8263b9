#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "earncast/consensus.hpp"
#include "earncast/panel.hpp"

namespace earncast {

struct SignalSpec {
  /// Ratio variables whose previous-quarter deviation moves net income.
  std::vector<std::string> driver_variables{"xsgaq", "invtq"};
  std::vector<double> coefficients{-0.25, 0.20};
  double seasonality_amplitude = 0.004;
  /// Sd of the company-specific part of the seasonal amplitude.
  double seasonality_dispersion = 0.03;
  /// Sd of the margin shock, as a fraction of lagged assets.
  double noise_sd = 0.07;
  double missing_rate = 0.05;
  int n_companies = 300;
  int n_quarters = 120;
  std::uint64_t seed = 1;
  CalendarQuarter start{1990, 1};
  /// Extra ratio variables with no effect on earnings.
  int n_filler_variables = 8;
  /// AR(1) coefficient of every ratio variable.
  double ratio_phi = 0.8;
  /// Sd of each ratio variable's company-specific seasonal amplitude, in
  /// units of that variable's sd.
  double ratio_seasonality = 2.0;
  /// Sd of analyst error relative to the noiseless net income.
  double consensus_noise_sd = 0.004;
  /// Share of companies flagged to fail each sample filter.
  double filtered_share = 0.02;

  /// Throws Error(kInvalidSpec).
  void validate() const;
};

struct SyntheticData {
  Schema schema;
  RawPanel panel;  // company meta attached
  /// Noiseless net income, aligned with panel.keys().
  std::vector<double> target;
  ConsensusTable consensus;
};

/// Ratio variables the generator knows, drivers first available.
std::vector<std::string> synthetic_ratio_catalog();

SyntheticData generate_panel(const SignalSpec& spec);

/// schema.csv, panel.csv, companies.csv, consensus.csv and truth.csv.
void write_synthetic(const SyntheticData& data, const std::filesystem::path& dir);

}  // namespace earncast
