#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "earncast/matrix.hpp"
#include "earncast/panel.hpp"

namespace earncast {

struct FeatureColumnMeta {
  std::string base_variable;
  Format format = Format::kRaw;
  int lag = 0;
  /// Company-level column that receives the look-back expansion.
  bool lagged = true;
  /// Derived from a crucial variable (sample deletion applies).
  bool crucial = false;
  /// Upper cap frozen by clip_outliers for reuse on later rows.
  std::optional<double> cap;

  /// "niq_qoq", "txpq_atq_lag4" (Pct formats use the denominator suffix).
  std::string name() const;
  bool is_growth() const { return format == Format::kYoY || format == Format::kQoQ; }
  bool is_pct() const { return format == Format::kPctAssets || format == Format::kPctRevenue; }
  bool is_converted() const { return format != Format::kRaw; }
};

/// Samples x engineered features. Keys sorted by (company, quarter).
struct FeatureMatrix {
  std::vector<PanelKey> keys;
  std::vector<FeatureColumnMeta> metas;
  std::vector<std::vector<Cell>> columns;
  /// Per column, per row: 1 when every original input of the cell was
  /// strictly positive. Empty when not tracked (direct input).
  std::vector<std::vector<std::uint8_t>> positive_origin;

  std::size_t rows() const { return keys.size(); }
  std::size_t cols() const { return metas.size(); }

  /// Throws Error(kDimensionMismatch / kDuplicateName) on a broken shape.
  void check_invariants() const;
  std::size_t missing_count() const;
  FeatureMatrix select_rows(std::span<const std::size_t> rows) const;
  FeatureMatrix select_columns(std::span<const std::size_t> cols) const;
  /// Throws Error(kDegenerateInput) if any cell is Missing.
  Matrix to_dense() const;
};

enum class FormulaVariant {
  kStandard,  // (T0 - Tk) / Tk
  kAppendix,  // (T0 - Tk) / Tk - 1
};

FormulaVariant parse_formula_variant(std::string_view text);
const char* to_string(FormulaVariant variant);

/// Emits one lag-0 column per (variable, enabled format). Original values
/// are clamped at zero before any conversion; Missing propagates.
FeatureMatrix convert_formats(const RawPanel& panel, const Schema& schema,
                              FormulaVariant variant = FormulaVariant::kStandard);

struct ClipOptions {
  double pct = 0.95;
  /// Caps are estimated on rows up to this quarter and applied to all rows.
  std::optional<CalendarQuarter> fit_until;
  FormulaVariant variant = FormulaVariant::kStandard;
};

/// Re-applies the zero clamp (as a floor in converted space) and caps every
/// converted column at the nearest-rank pct-quantile of its positive-origin
/// values. The caps are stored in the returned metas.
FeatureMatrix clip_outliers(const FeatureMatrix& m, const ClipOptions& options = {});

/// Nearest-rank quantile of unsorted values (copies). Empty input -> nullopt.
std::optional<double> nearest_rank_quantile(std::vector<double> values, double pct);

/// Mean squared residual of predicting each present value by the mean of
/// the previous p present values, for p = 1..max_p, pooled over series.
std::vector<double> fill_period_residuals(std::span<const std::vector<Cell>> series, int max_p = 20);
/// argmin over fill_period_residuals (ties -> smallest p). Throws
/// Error(kInsufficientData) when fewer than 2 present values exist.
int select_fill_period(std::span<const Cell> series, int max_p = 20);
int select_fill_period_pooled(std::span<const std::vector<Cell>> series, int max_p = 20);

struct FillReport {
  struct Period {
    std::string column;
    int chosen_p = 1;
    std::vector<double> residuals;  // index p-1
  };
  std::vector<Period> periods;
  std::size_t deleted_rows = 0;
  std::vector<std::string> deleted_columns;
  std::size_t relevant_filled = 0;
  std::size_t constant_filled = 0;
};

/// One JSON record per line: a summary record then one per chosen period.
void write_fill_report(const FillReport& report, std::ostream& out);

struct ImputeOptions {
  int lookback = 20;
  double max_missing_rate = 0.70;
  int horizon_cap = 8;
  int max_p = 20;
  double constant = -1.0;
  /// Missing rates and fill periods are estimated on rows up to this quarter.
  std::optional<CalendarQuarter> fit_until;
};

/// Sample deletion, variable deletion, relevant fill-in (Pct columns),
/// constant fill-in, in that order. The output has no Missing cells.
FeatureMatrix impute(const FeatureMatrix& m, FillReport& report, const ImputeOptions& options = {});

struct DroppedPair {
  std::string dropped;
  std::string kept;
  double correlation = 0.0;
};

/// Greedy scan in column order: returns the indices of kept columns; a
/// column is dropped when |r| with an already-kept column exceeds cutoff.
std::vector<std::size_t> correlation_keep(const Matrix& x, double cutoff,
                                          std::vector<std::pair<std::size_t, std::size_t>>* dropped = nullptr,
                                          std::vector<double>* dropped_r = nullptr);

struct DedupeResult {
  FeatureMatrix matrix;
  std::vector<std::size_t> kept;
  std::vector<DroppedPair> dropped;
};

DedupeResult correlation_dedupe_inputs(const FeatureMatrix& m, double cutoff = 0.9);

double pearson(std::span<const double> a, std::span<const double> b);

/// Row/column plan for the look-back expansion: shared by the FeatureMatrix
/// and dense materializations.
struct LagPlan {
  int n_lags = 20;
  std::vector<std::size_t> rows;  // input rows with full history
  /// per output column: (input column, lag)
  std::vector<std::pair<std::size_t, int>> columns;
  /// per kept row, the input row of lag L at [i * n_lags + L]
  std::vector<std::size_t> sources;
};

LagPlan plan_lags(std::span<const PanelKey> keys, std::span<const FeatureColumnMeta> metas, int n_lags);
std::size_t lagged_column_count(std::size_t lagged_bases, std::size_t unlagged_bases, int n_lags);

FeatureMatrix build_lags(const FeatureMatrix& m, int n_lags = 20);
/// Dense lagged features for a subset of the plan's rows (indices into
/// plan.rows). Input must be Missing-free.
Matrix materialize_lags(const FeatureMatrix& m, const LagPlan& plan,
                        std::span<const std::size_t> plan_rows);
std::vector<FeatureColumnMeta> lagged_metas(const FeatureMatrix& m, const LagPlan& plan);

enum class Horizon { kQoQ, kYoY };
enum class LabelScheme { kQuantileRank, kSign };

Horizon parse_horizon(std::string_view text);
LabelScheme parse_label_scheme(std::string_view text);
const char* to_string(Horizon horizon);
const char* to_string(LabelScheme scheme);

struct LabelSpec {
  Horizon horizon = Horizon::kQoQ;
  int n_classes = 3;
  LabelScheme scheme = LabelScheme::kQuantileRank;
};

struct LabelVector {
  std::vector<PanelKey> keys;
  std::vector<std::optional<int>> values;
  int n_classes = 3;
  Horizon horizon = Horizon::kQoQ;
  LabelScheme scheme = LabelScheme::kQuantileRank;
};

/// Relative earnings change: QoQ (NI[T+1] - NI[T]) / A[T]; YoY
/// (sum NI[T+1..T+4] - sum NI[T-3..T]) / A[T]. Missing when any input is.
std::vector<Cell> earnings_targets(const RawPanel& panel, std::size_t income_var, std::size_t assets_var,
                                   Horizon horizon, std::span<const PanelKey> keys);

/// Within each calendar quarter, equal-count rank bins (stable on
/// (target, company)); Missing targets stay Missing.
std::vector<std::optional<int>> quantile_classes(std::span<const Cell> targets,
                                                 std::span<const PanelKey> keys, int n_classes);
std::vector<std::optional<int>> sign_classes(std::span<const Cell> targets);

LabelVector build_labels(const RawPanel& panel, const LabelSpec& spec);
LabelVector build_labels(const RawPanel& panel, const LabelSpec& spec, std::span<const PanelKey> keys);

}  // namespace earncast
