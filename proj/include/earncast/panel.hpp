#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "earncast/quarter.hpp"

namespace earncast {

enum class StatementGroup { kIncome, kBalance, kCashflow, kMacro, kMarket };

enum class Format { kYoY, kQoQ, kPctAssets, kPctRevenue, kRaw };

const char* to_string(StatementGroup group);
const char* to_string(Format format);
StatementGroup parse_statement_group(std::string_view text);
Format parse_format(std::string_view text);

/// Subset of the five formats, iterated in the fixed order YoY, QoQ,
/// PctAssets, PctRevenue, Raw.
class FormatSet {
 public:
  FormatSet() = default;
  FormatSet(std::initializer_list<Format> formats) {
    for (auto f : formats) insert(f);
  }
  void insert(Format f) { bits_ |= bit(f); }
  bool contains(Format f) const { return (bits_ & bit(f)) != 0; }
  bool empty() const { return bits_ == 0; }
  std::vector<Format> list() const;
  bool operator==(const FormatSet&) const = default;

 private:
  static std::uint8_t bit(Format f) { return static_cast<std::uint8_t>(1u << static_cast<int>(f)); }
  std::uint8_t bits_ = 0;
};

/// Names of the two scale variables used as Pct denominators.
inline constexpr const char* kAssetsVariable = "atq";
inline constexpr const char* kRevenueVariable = "revtq";
inline constexpr const char* kNetIncomeVariable = "niq";

struct VariableSpec {
  std::string name;
  StatementGroup group = StatementGroup::kIncome;
  FormatSet formats;
  bool crucial = false;
  bool next_quarter_aligned = false;

  /// Company-level accounting variable (lagged, clamped); macro and market
  /// series are neither.
  bool financial() const {
    return group != StatementGroup::kMacro && group != StatementGroup::kMarket;
  }
  bool operator==(const VariableSpec&) const = default;
};

using Schema = std::vector<VariableSpec>;

/// Header: name,statement_group,yoy,qoq,pct_assets,pct_revenue,crucial,next_quarter_aligned
Schema load_schema(const std::filesystem::path& path);
Schema parse_schema(std::istream& in);
void write_schema(const Schema& schema, std::ostream& out);
const VariableSpec* find_variable(const Schema& schema, std::string_view name);

using Cell = std::optional<double>;

struct CompanyMeta {
  std::optional<int> sector_code;
  std::optional<double> min_share_price;
  std::optional<bool> fiscal_alignment;
  std::optional<bool> reporting_gap;
  bool operator==(const CompanyMeta&) const = default;
};

using CompanyMetaTable = std::map<CompanyId, CompanyMeta>;

/// Per-(company, calendar quarter) raw values. Keys are sorted by
/// (company, quarter) and unique; every column has one cell per key.
class RawPanel {
 public:
  RawPanel() = default;
  /// Sorts rows by key and validates the invariants; throws on duplicates or
  /// ragged columns.
  RawPanel(std::vector<std::string> variables, std::vector<PanelKey> keys,
           std::vector<std::vector<Cell>> columns, CompanyMetaTable meta = {});

  std::span<const PanelKey> keys() const { return keys_; }
  std::span<const std::string> variables() const { return variables_; }
  std::size_t rows() const { return keys_.size(); }
  const CompanyMetaTable& meta() const { return meta_; }

  std::optional<std::size_t> variable_index(std::string_view name) const;
  bool has_variable(std::string_view name) const { return variable_index(name).has_value(); }
  std::span<const Cell> column(std::size_t index) const { return columns_[index]; }
  /// Throws Error(kUnknownVariable).
  std::span<const Cell> column(std::string_view name) const;

  std::optional<std::size_t> find_row(const PanelKey& key) const;
  /// Value of `variable` for `company` at `quarter`, Missing when either the
  /// row or the value is absent.
  Cell lookup(std::size_t variable, const CompanyId& company, CalendarQuarter quarter) const;

  /// Sorted distinct calendar quarters present in the panel.
  std::vector<CalendarQuarter> quarters() const;
  std::vector<CompanyId> companies() const;

  RawPanel with_meta(CompanyMetaTable meta) const;
  /// Keeps the rows whose index is listed (ascending).
  RawPanel select_rows(std::span<const std::size_t> rows) const;
  RawPanel with_column(std::size_t index, std::vector<Cell> values) const;

  bool operator==(const RawPanel& other) const {
    return variables_ == other.variables_ && keys_ == other.keys_ && columns_ == other.columns_ &&
           meta_ == other.meta_;
  }

 private:
  void build_index();

  std::vector<std::string> variables_;
  std::vector<PanelKey> keys_;
  std::vector<std::vector<Cell>> columns_;
  CompanyMetaTable meta_;
  std::unordered_map<PanelKey, std::size_t, PanelKeyHash> index_;
};

/// Long format: company_id,year,quarter,variable,value (empty value = Missing).
RawPanel load_panel(const std::filesystem::path& path, const Schema& schema);
RawPanel parse_panel(std::istream& in, const Schema& schema);
/// Writes every (key, variable) cell so a reload reproduces the key set.
void write_panel(const RawPanel& panel, std::ostream& out);
void write_panel(const RawPanel& panel, const std::filesystem::path& path);

/// company_id,sector_code,min_share_price,fiscal_alignment_flag,reporting_gap_flag
CompanyMetaTable load_company_meta(const std::filesystem::path& path);
CompanyMetaTable parse_company_meta(std::istream& in);
void write_company_meta(const CompanyMetaTable& meta, std::ostream& out);

struct FilterRules {
  bool require_company_id = true;
  std::optional<double> min_share_price = 1.0;
  std::set<int> excluded_sectors = {40, 55};
  bool require_fiscal_alignment = true;
  bool drop_reporting_gaps = true;
};

/// Drops whole companies failing any enabled rule; absent attributes pass.
RawPanel apply_sample_filters(const RawPanel& panel, const FilterRules& rules);

/// Variables flagged next_quarter_aligned take, at quarter T, the value
/// observed at T+1; a company's final quarter becomes Missing.
RawPanel shift_forward_aligned(const RawPanel& panel, const Schema& schema);

}  // namespace earncast
