#include "earncast/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include <json.hpp>

#include "earncast/error.hpp"

namespace earncast {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const char* format_suffix(Format f) {
  switch (f) {
    case Format::kYoY: return "yoy";
    case Format::kQoQ: return "qoq";
    case Format::kPctAssets: return "atq";
    case Format::kPctRevenue: return "revtq";
    case Format::kRaw: return "raw";
  }
  return "?";
}

/// Growth of a clamped pair; base 0 with a positive current value is the
/// division-by-zero blowup that the cap later absorbs.
double growth(double current, double base, FormulaVariant variant) {
  current = std::max(current, 0.0);
  base = std::max(base, 0.0);
  double g;
  if (base > 0.0) {
    g = (current - base) / base;
  } else {
    g = current > 0.0 ? kInf : 0.0;
  }
  return variant == FormulaVariant::kAppendix ? g - 1.0 : g;
}

double log_share(double value, double denominator) {
  value = std::max(value, 0.0);
  denominator = std::max(denominator, 0.0);
  if (denominator > 0.0) return std::log(value / denominator + 1.0);
  return value > 0.0 ? kInf : 0.0;
}

double converted_floor(Format f, FormulaVariant variant) {
  if (f == Format::kYoY || f == Format::kQoQ) return variant == FormulaVariant::kAppendix ? -2.0 : -1.0;
  return 0.0;
}

/// Row ranges [begin, end) of each company in key order.
std::vector<std::pair<std::size_t, std::size_t>> company_segments(std::span<const PanelKey> keys) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t start = 0;
  for (std::size_t r = 1; r <= keys.size(); ++r) {
    if (r == keys.size() || keys[r].company != keys[start].company) {
      out.emplace_back(start, r);
      start = r;
    }
  }
  if (keys.empty()) out.clear();
  return out;
}

bool in_fit(const PanelKey& key, const std::optional<CalendarQuarter>& fit_until) {
  return !fit_until || key.quarter <= *fit_until;
}

}  // namespace

std::string FeatureColumnMeta::name() const {
  std::string out = base_variable + "_" + format_suffix(format);
  if (lag > 0) out += "_lag" + std::to_string(lag);
  return out;
}

void FeatureMatrix::check_invariants() const {
  if (columns.size() != metas.size()) {
    throw Error(ErrorKind::kDimensionMismatch, "feature matrix has " + std::to_string(metas.size()) +
                                                   " metas but " + std::to_string(columns.size()) +
                                                   " columns");
  }
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c].size() != keys.size()) {
      throw Error(ErrorKind::kDimensionMismatch, "column " + metas[c].name() + " length mismatch");
    }
  }
  if (!positive_origin.empty() && positive_origin.size() != columns.size()) {
    throw Error(ErrorKind::kDimensionMismatch, "positive-origin mask shape mismatch");
  }
  std::set<std::tuple<std::string, Format, int>> seen;
  for (const auto& m : metas) {
    if (!seen.emplace(m.base_variable, m.format, m.lag).second) {
      throw Error(ErrorKind::kDuplicateName, "duplicate feature column " + m.name());
    }
  }
}

std::size_t FeatureMatrix::missing_count() const {
  std::size_t n = 0;
  for (const auto& col : columns)
    for (const auto& cell : col) n += cell.has_value() ? 0 : 1;
  return n;
}

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> rows) const {
  FeatureMatrix out;
  out.metas = metas;
  out.keys.reserve(rows.size());
  for (auto r : rows) out.keys.push_back(keys[r]);
  out.columns.resize(columns.size());
  for (std::size_t c = 0; c < columns.size(); ++c) {
    out.columns[c].reserve(rows.size());
    for (auto r : rows) out.columns[c].push_back(columns[c][r]);
  }
  if (!positive_origin.empty()) {
    out.positive_origin.resize(columns.size());
    for (std::size_t c = 0; c < columns.size(); ++c) {
      out.positive_origin[c].reserve(rows.size());
      for (auto r : rows) out.positive_origin[c].push_back(positive_origin[c][r]);
    }
  }
  return out;
}

FeatureMatrix FeatureMatrix::select_columns(std::span<const std::size_t> cols) const {
  FeatureMatrix out;
  out.keys = keys;
  for (auto c : cols) {
    out.metas.push_back(metas[c]);
    out.columns.push_back(columns[c]);
    if (!positive_origin.empty()) out.positive_origin.push_back(positive_origin[c]);
  }
  return out;
}

Matrix FeatureMatrix::to_dense() const {
  Matrix out(rows(), cols());
  for (std::size_t c = 0; c < cols(); ++c) {
    for (std::size_t r = 0; r < rows(); ++r) {
      const auto& cell = columns[c][r];
      if (!cell) {
        throw Error(ErrorKind::kDegenerateInput,
                    "Missing cell in column " + metas[c].name() + " at " + keys[r].company + " " +
                        keys[r].quarter.to_string());
      }
      out(r, c) = *cell;
    }
  }
  return out;
}

FormulaVariant parse_formula_variant(std::string_view text) {
  if (text == "standard") return FormulaVariant::kStandard;
  if (text == "appendix") return FormulaVariant::kAppendix;
  throw Error(ErrorKind::kInvalidConfig, "formula_variant must be standard|appendix, got '" +
                                             std::string(text) + "'");
}

const char* to_string(FormulaVariant variant) {
  return variant == FormulaVariant::kStandard ? "standard" : "appendix";
}

// ---------------------------------------------------------------------------
// Format conversion

FeatureMatrix convert_formats(const RawPanel& panel, const Schema& schema, FormulaVariant variant) {
  const auto assets = panel.variable_index(kAssetsVariable);
  const auto revenue = panel.variable_index(kRevenueVariable);
  for (const auto& v : schema) {
    if (v.formats.contains(Format::kPctAssets) && !assets) {
      throw Error(ErrorKind::kMissingDenominator,
                  v.name + " requests pct_assets but the panel has no '" + kAssetsVariable + "' column");
    }
    if (v.formats.contains(Format::kPctRevenue) && !revenue) {
      throw Error(ErrorKind::kMissingDenominator,
                  v.name + " requests pct_revenue but the panel has no '" + kRevenueVariable + "' column");
    }
  }

  const auto keys = panel.keys();
  FeatureMatrix out;
  out.keys.assign(keys.begin(), keys.end());

  for (const auto& v : schema) {
    const auto var = panel.variable_index(v.name);
    if (!var) throw Error(ErrorKind::kUnknownVariable, "panel has no variable '" + v.name + "'");
    const auto values = panel.column(*var);
    for (const auto f : v.formats.list()) {
      FeatureColumnMeta meta{v.name, f, 0, v.financial(), v.crucial, std::nullopt};
      std::vector<Cell> col(keys.size());
      std::vector<std::uint8_t> origin(keys.size(), 0);
      for (std::size_t r = 0; r < keys.size(); ++r) {
        const Cell& cur = values[r];
        if (!cur) continue;
        switch (f) {
          case Format::kRaw:
            col[r] = *cur;
            origin[r] = *cur > 0.0;
            break;
          case Format::kQoQ:
          case Format::kYoY: {
            const int back = f == Format::kQoQ ? 1 : 4;
            const Cell base = panel.lookup(*var, keys[r].company, keys[r].quarter - back);
            if (!base) break;
            col[r] = growth(*cur, *base, variant);
            origin[r] = *cur > 0.0 && *base > 0.0;
            break;
          }
          case Format::kPctAssets:
          case Format::kPctRevenue: {
            const auto denom_idx = f == Format::kPctAssets ? *assets : *revenue;
            const Cell& denom = panel.column(denom_idx)[r];
            if (!denom) break;
            col[r] = log_share(*cur, *denom);
            origin[r] = *cur > 0.0 && *denom > 0.0;
            break;
          }
        }
      }
      out.metas.push_back(std::move(meta));
      out.columns.push_back(std::move(col));
      out.positive_origin.push_back(std::move(origin));
    }
  }
  out.check_invariants();
  return out;
}

// ---------------------------------------------------------------------------
// Outliers

std::optional<double> nearest_rank_quantile(std::vector<double> values, double pct) {
  if (values.empty()) return std::nullopt;
  const auto n = values.size();
  auto rank = static_cast<std::size_t>(std::ceil(pct * static_cast<double>(n)));
  rank = std::clamp<std::size_t>(rank, 1, n);
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(rank - 1), values.end());
  return values[rank - 1];
}

FeatureMatrix clip_outliers(const FeatureMatrix& m, const ClipOptions& options) {
  m.check_invariants();
  FeatureMatrix out = m;
  for (std::size_t c = 0; c < out.cols(); ++c) {
    auto& meta = out.metas[c];
    if (!meta.is_converted()) continue;
    auto& col = out.columns[c];
    const double floor = converted_floor(meta.format, options.variant);

    std::vector<double> eligible;
    double max_finite = -kInf;
    bool any_inf = false;
    for (std::size_t r = 0; r < col.size(); ++r) {
      auto& cell = col[r];
      if (!cell) continue;
      if (*cell < floor) cell = floor;
      if (!in_fit(out.keys[r], options.fit_until)) continue;
      if (std::isinf(*cell)) {
        any_inf = true;
        continue;
      }
      max_finite = std::max(max_finite, *cell);
      const bool positive = out.positive_origin.empty() || out.positive_origin[c][r] != 0;
      if (positive) eligible.push_back(*cell);
    }
    std::optional<double> cap = nearest_rank_quantile(std::move(eligible), options.pct);
    if (!cap && max_finite > -kInf) cap = max_finite;
    if (!cap && any_inf) cap = floor;
    meta.cap = cap;
    if (!cap) continue;
    for (auto& cell : col) {
      if (cell && *cell > *cap) cell = *cap;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Missing values

std::vector<double> fill_period_residuals(std::span<const std::vector<Cell>> series, int max_p) {
  if (max_p < 1) throw Error(ErrorKind::kInvalidParams, "max_p must be >= 1");
  std::vector<double> sums(static_cast<std::size_t>(max_p), 0.0);
  std::size_t n = 0;
  std::vector<double> present;
  for (const auto& s : series) {
    present.clear();
    for (const auto& cell : s)
      if (cell) present.push_back(*cell);
    for (std::size_t i = 1; i < present.size(); ++i) {
      double window = 0.0;
      std::size_t count = 0;
      for (int p = 1; p <= max_p; ++p) {
        if (count < i) {
          window += present[i - 1 - count];
          ++count;
        }
        const double diff = present[i] - window / static_cast<double>(count);
        sums[static_cast<std::size_t>(p - 1)] += diff * diff;
      }
      ++n;
    }
  }
  if (n == 0) {
    throw Error(ErrorKind::kInsufficientData, "fill-period selection needs at least 2 present values");
  }
  for (auto& s : sums) s /= static_cast<double>(n);
  return sums;
}

int select_fill_period_pooled(std::span<const std::vector<Cell>> series, int max_p) {
  const auto residuals = fill_period_residuals(series, max_p);
  // strict < keeps the smallest p on ties
  std::size_t best = 0;
  for (std::size_t p = 1; p < residuals.size(); ++p) {
    if (residuals[p] < residuals[best]) best = p;
  }
  return static_cast<int>(best) + 1;
}

int select_fill_period(std::span<const Cell> series, int max_p) {
  std::vector<std::vector<Cell>> one{std::vector<Cell>(series.begin(), series.end())};
  return select_fill_period_pooled(one, max_p);
}

void write_fill_report(const FillReport& report, std::ostream& out) {
  nlohmann::json summary = {{"record", "summary"},
                            {"deleted_rows", report.deleted_rows},
                            {"deleted_columns", report.deleted_columns},
                            {"relevant_filled", report.relevant_filled},
                            {"constant_filled", report.constant_filled}};
  out << summary.dump() << '\n';
  for (const auto& p : report.periods) {
    nlohmann::json rec = {{"record", "fill_period"},
                          {"column", p.column},
                          {"chosen_p", p.chosen_p},
                          {"residuals", p.residuals}};
    out << rec.dump() << '\n';
  }
}

FeatureMatrix impute(const FeatureMatrix& m, FillReport& report, const ImputeOptions& options) {
  m.check_invariants();
  report = FillReport{};

  // (1) sample deletion: a crucial column missing at this row or anywhere in
  // its look-back window.
  std::vector<std::size_t> keep_rows;
  {
    std::vector<std::size_t> crucial;
    for (std::size_t c = 0; c < m.cols(); ++c)
      if (m.metas[c].crucial) crucial.push_back(c);
    for (const auto& [begin, end] : company_segments(m.keys)) {
      std::optional<CalendarQuarter> last_missing;
      for (std::size_t r = begin; r < end; ++r) {
        const bool missing = std::any_of(crucial.begin(), crucial.end(),
                                         [&](std::size_t c) { return !m.columns[c][r].has_value(); });
        if (missing) last_missing = m.keys[r].quarter;
        if (last_missing && m.keys[r].quarter - *last_missing < options.lookback) continue;
        keep_rows.push_back(r);
      }
    }
  }
  report.deleted_rows = m.rows() - keep_rows.size();
  FeatureMatrix work = m.select_rows(keep_rows);

  // (2) variable deletion, missing rate measured before any fill.
  std::vector<std::size_t> keep_cols;
  for (std::size_t c = 0; c < work.cols(); ++c) {
    std::size_t total = 0;
    std::size_t missing = 0;
    for (std::size_t r = 0; r < work.rows(); ++r) {
      if (!in_fit(work.keys[r], options.fit_until)) continue;
      ++total;
      missing += work.columns[c][r] ? 0 : 1;
    }
    const double rate = total == 0 ? 0.0 : static_cast<double>(missing) / static_cast<double>(total);
    if (rate > options.max_missing_rate) {
      report.deleted_columns.push_back(work.metas[c].name());
    } else {
      keep_cols.push_back(c);
    }
  }
  work = work.select_columns(keep_cols);

  // (3) relevant fill-in on Pct columns: the first horizon_cap cells of each
  // gap take the mean of the last p present values before the gap.
  const auto segments = company_segments(work.keys);
  for (std::size_t c = 0; c < work.cols(); ++c) {
    if (!work.metas[c].is_pct()) continue;
    auto& col = work.columns[c];
    std::vector<std::vector<Cell>> fit_series;
    for (const auto& [begin, end] : segments) {
      std::vector<Cell> s;
      for (std::size_t r = begin; r < end; ++r)
        if (in_fit(work.keys[r], options.fit_until)) s.push_back(col[r]);
      fit_series.push_back(std::move(s));
    }
    FillReport::Period period{work.metas[c].name(), 1, {}};
    try {
      period.residuals = fill_period_residuals(fit_series, options.max_p);
      period.chosen_p = select_fill_period_pooled(fit_series, options.max_p);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kInsufficientData) throw;
      report.periods.push_back(period);
      continue;  // nothing to learn from; constant fill takes over
    }
    report.periods.push_back(period);
    const auto p = static_cast<std::size_t>(period.chosen_p);

    for (const auto& [begin, end] : segments) {
      std::vector<double> history;  // original present values, oldest first
      int run = 0;
      double fill = 0.0;
      for (std::size_t r = begin; r < end; ++r) {
        if (col[r]) {
          history.push_back(*col[r]);
          run = 0;
          continue;
        }
        if (history.empty()) continue;
        if (run == 0) {
          const std::size_t take = std::min(p, history.size());
          double sum = 0.0;
          for (std::size_t k = 0; k < take; ++k) sum += history[history.size() - 1 - k];
          fill = sum / static_cast<double>(take);
        }
        if (run < options.horizon_cap) {
          col[r] = fill;
          ++report.relevant_filled;
        }
        ++run;
      }
    }
  }

  // (4) constant fill-in for everything left.
  for (auto& col : work.columns) {
    for (auto& cell : col) {
      if (!cell) {
        cell = options.constant;
        ++report.constant_filled;
      }
    }
  }
  return work;
}

// ---------------------------------------------------------------------------
// Correlation pre-filter

double pearson(std::span<const double> a, std::span<const double> b) {
  const auto n = a.size();
  if (n != b.size() || n < 2) return 0.0;
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(n);
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / static_cast<double>(n);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa <= 0.0 || sbb <= 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

std::vector<std::size_t> correlation_keep(const Matrix& x, double cutoff,
                                          std::vector<std::pair<std::size_t, std::size_t>>* dropped,
                                          std::vector<double>* dropped_r) {
  const auto n = x.rows();
  const auto d = x.cols();
  // Unit-norm centered columns, column-major; zero vector for constants.
  std::vector<std::vector<double>> z(d, std::vector<double>(n));
  std::vector<bool> constant(d, false);
  for (std::size_t c = 0; c < d; ++c) {
    double mean = 0.0;
    for (std::size_t r = 0; r < n; ++r) mean += x(r, c);
    mean /= static_cast<double>(std::max<std::size_t>(n, 1));
    double ss = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      z[c][r] = x(r, c) - mean;
      ss += z[c][r] * z[c][r];
    }
    if (ss <= 0.0 || n < 2) {
      constant[c] = true;
      std::fill(z[c].begin(), z[c].end(), 0.0);
      continue;
    }
    const double inv = 1.0 / std::sqrt(ss);
    for (auto& v : z[c]) v *= inv;
  }
  std::vector<std::size_t> kept;
  for (std::size_t c = 0; c < d; ++c) {
    bool drop = false;
    if (!constant[c]) {
      for (auto k : kept) {
        if (constant[k]) continue;
        double r = 0.0;
        for (std::size_t i = 0; i < n; ++i) r += z[c][i] * z[k][i];
        if (std::abs(r) > cutoff) {
          drop = true;
          if (dropped) dropped->emplace_back(c, k);
          if (dropped_r) dropped_r->push_back(r);
          break;
        }
      }
    }
    if (!drop) kept.push_back(c);
  }
  return kept;
}

DedupeResult correlation_dedupe_inputs(const FeatureMatrix& m, double cutoff) {
  const Matrix x = m.to_dense();
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<double> rs;
  DedupeResult out;
  out.kept = correlation_keep(x, cutoff, &pairs, &rs);
  out.matrix = m.select_columns(out.kept);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    out.dropped.push_back({m.metas[pairs[i].first].name(), m.metas[pairs[i].second].name(), rs[i]});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Look-back expansion

std::size_t lagged_column_count(std::size_t lagged_bases, std::size_t unlagged_bases, int n_lags) {
  return lagged_bases * static_cast<std::size_t>(n_lags) + unlagged_bases;
}

LagPlan plan_lags(std::span<const PanelKey> keys, std::span<const FeatureColumnMeta> metas, int n_lags) {
  if (n_lags < 1) throw Error(ErrorKind::kInvalidParams, "n_lags must be >= 1");
  LagPlan plan;
  plan.n_lags = n_lags;
  for (std::size_t c = 0; c < metas.size(); ++c) {
    if (metas[c].lag != 0) {
      throw Error(ErrorKind::kInvalidParams, "build_lags expects lag-0 columns, got " + metas[c].name());
    }
    if (metas[c].lagged) {
      for (int l = 0; l < n_lags; ++l) plan.columns.emplace_back(c, l);
    } else {
      plan.columns.emplace_back(c, 0);
    }
  }
  for (std::size_t r = 0; r < keys.size(); ++r) {
    std::vector<std::size_t> src(static_cast<std::size_t>(n_lags));
    bool complete = true;
    for (int l = 0; l < n_lags && complete; ++l) {
      const PanelKey want{keys[r].company, keys[r].quarter - l};
      std::size_t found = keys.size();
      if (r >= static_cast<std::size_t>(l) && keys[r - static_cast<std::size_t>(l)] == want) {
        found = r - static_cast<std::size_t>(l);
      } else {
        const auto it = std::lower_bound(keys.begin(), keys.end(), want);
        if (it != keys.end() && *it == want) found = static_cast<std::size_t>(it - keys.begin());
      }
      if (found == keys.size()) complete = false;
      else src[static_cast<std::size_t>(l)] = found;
    }
    if (!complete) continue;
    plan.rows.push_back(r);
    plan.sources.insert(plan.sources.end(), src.begin(), src.end());
  }
  return plan;
}

std::vector<FeatureColumnMeta> lagged_metas(const FeatureMatrix& m, const LagPlan& plan) {
  std::vector<FeatureColumnMeta> out;
  out.reserve(plan.columns.size());
  for (const auto& [c, l] : plan.columns) {
    auto meta = m.metas[c];
    meta.lag = l;
    out.push_back(std::move(meta));
  }
  return out;
}

FeatureMatrix build_lags(const FeatureMatrix& m, int n_lags) {
  m.check_invariants();
  const auto plan = plan_lags(m.keys, m.metas, n_lags);
  FeatureMatrix out;
  out.metas = lagged_metas(m, plan);
  for (auto r : plan.rows) out.keys.push_back(m.keys[r]);
  const auto lags = static_cast<std::size_t>(plan.n_lags);
  out.columns.resize(plan.columns.size());
  const bool origin = !m.positive_origin.empty();
  if (origin) out.positive_origin.resize(plan.columns.size());
  for (std::size_t j = 0; j < plan.columns.size(); ++j) {
    const auto [c, l] = plan.columns[j];
    auto& col = out.columns[j];
    col.reserve(plan.rows.size());
    for (std::size_t i = 0; i < plan.rows.size(); ++i) {
      const auto src = plan.sources[i * lags + static_cast<std::size_t>(l)];
      col.push_back(m.columns[c][src]);
      if (origin) out.positive_origin[j].push_back(m.positive_origin[c][src]);
    }
  }
  return out;
}

Matrix materialize_lags(const FeatureMatrix& m, const LagPlan& plan, std::span<const std::size_t> plan_rows) {
  const auto lags = static_cast<std::size_t>(plan.n_lags);
  Matrix out(plan_rows.size(), plan.columns.size());
  for (std::size_t j = 0; j < plan.columns.size(); ++j) {
    const auto [c, l] = plan.columns[j];
    const auto& col = m.columns[c];
    for (std::size_t i = 0; i < plan_rows.size(); ++i) {
      const auto src = plan.sources[plan_rows[i] * lags + static_cast<std::size_t>(l)];
      const auto& cell = col[src];
      if (!cell) throw Error(ErrorKind::kDegenerateInput, "Missing cell in " + m.metas[c].name());
      out(i, j) = *cell;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Labels

Horizon parse_horizon(std::string_view text) {
  if (text == "qoq" || text == "QoQ") return Horizon::kQoQ;
  if (text == "yoy" || text == "YoY") return Horizon::kYoY;
  throw Error(ErrorKind::kInvalidConfig, "horizon must be qoq|yoy, got '" + std::string(text) + "'");
}

LabelScheme parse_label_scheme(std::string_view text) {
  if (text == "quantile_rank") return LabelScheme::kQuantileRank;
  if (text == "sign") return LabelScheme::kSign;
  throw Error(ErrorKind::kInvalidConfig, "scheme must be quantile_rank|sign, got '" + std::string(text) + "'");
}

const char* to_string(Horizon horizon) { return horizon == Horizon::kQoQ ? "qoq" : "yoy"; }
const char* to_string(LabelScheme scheme) {
  return scheme == LabelScheme::kQuantileRank ? "quantile_rank" : "sign";
}

std::vector<Cell> earnings_targets(const RawPanel& panel, std::size_t income_var, std::size_t assets_var,
                                   Horizon horizon, std::span<const PanelKey> keys) {
  std::vector<Cell> out(keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const auto& [company, q] = keys[i];
    const Cell assets = panel.lookup(assets_var, company, q);
    if (!assets || *assets <= 0.0) continue;
    auto income = [&](int offset) { return panel.lookup(income_var, company, q + offset); };
    if (horizon == Horizon::kQoQ) {
      const Cell next = income(1);
      const Cell now = income(0);
      if (!next || !now) continue;
      out[i] = (*next - *now) / *assets;
    } else {
      double future = 0.0;
      double past = 0.0;
      bool ok = true;
      for (int k = 1; k <= 4 && ok; ++k) {
        const Cell f = income(k);
        const Cell p = income(1 - k);
        if (!f || !p) ok = false;
        else {
          future += *f;
          past += *p;
        }
      }
      if (ok) out[i] = (future - past) / *assets;
    }
  }
  return out;
}

std::vector<std::optional<int>> quantile_classes(std::span<const Cell> targets, std::span<const PanelKey> keys,
                                                 int n_classes) {
  if (n_classes < 2) throw Error(ErrorKind::kInvalidParams, "n_classes must be >= 2");
  if (targets.size() != keys.size()) throw Error(ErrorKind::kDimensionMismatch, "targets/keys length");
  std::map<CalendarQuarter, std::vector<std::size_t>> by_quarter;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (targets[i]) by_quarter[keys[i].quarter].push_back(i);
  }
  std::vector<std::optional<int>> out(keys.size());
  for (auto& [q, idx] : by_quarter) {
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      if (*targets[a] != *targets[b]) return *targets[a] < *targets[b];
      return keys[a].company < keys[b].company;
    });
    const auto n = idx.size();
    for (std::size_t rank = 0; rank < n; ++rank) {
      out[idx[rank]] = static_cast<int>(rank * static_cast<std::size_t>(n_classes) / n);
    }
  }
  return out;
}

std::vector<std::optional<int>> sign_classes(std::span<const Cell> targets) {
  std::vector<std::optional<int>> out(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i]) out[i] = *targets[i] > 0.0 ? 1 : 0;
  }
  return out;
}

LabelVector build_labels(const RawPanel& panel, const LabelSpec& spec, std::span<const PanelKey> keys) {
  if (spec.scheme == LabelScheme::kSign && spec.n_classes != 2) {
    throw Error(ErrorKind::kInvalidParams, "sign labels have exactly 2 classes");
  }
  const auto income = panel.variable_index(kNetIncomeVariable);
  const auto assets = panel.variable_index(kAssetsVariable);
  if (!income || !assets) {
    throw Error(ErrorKind::kMissingDenominator, "labels need both 'niq' and 'atq' in the panel");
  }
  LabelVector out;
  out.keys.assign(keys.begin(), keys.end());
  out.n_classes = spec.n_classes;
  out.horizon = spec.horizon;
  out.scheme = spec.scheme;
  const auto targets = earnings_targets(panel, *income, *assets, spec.horizon, keys);
  out.values = spec.scheme == LabelScheme::kSign ? sign_classes(targets)
                                                 : quantile_classes(targets, keys, spec.n_classes);
  return out;
}

LabelVector build_labels(const RawPanel& panel, const LabelSpec& spec) {
  return build_labels(panel, spec, panel.keys());
}

}  // namespace earncast
