#include "earncast/panel.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include "csv.hpp"
#include "earncast/error.hpp"

namespace earncast {

namespace {

constexpr std::string_view kSchemaHeader =
    "name,statement_group,yoy,qoq,pct_assets,pct_revenue,crucial,next_quarter_aligned";
constexpr std::string_view kPanelHeader = "company_id,year,quarter,variable,value";
constexpr std::string_view kMetaHeader =
    "company_id,sector_code,min_share_price,fiscal_alignment_flag,reporting_gap_flag";

std::string header_of(std::string line) {
  std::string out;
  for (auto part : csv::split(line)) {
    if (!out.empty()) out += ',';
    out += part;
  }
  return out;
}

bool parse_flag(std::string_view text, std::size_t line_no, std::string_view field) {
  if (text == "1" || text == "true") return true;
  if (text == "0" || text == "false" || text.empty()) return false;
  throw Error(ErrorKind::kParse, "line " + std::to_string(line_no) + ": field " +
                                     std::string(field) + " expects 0/1, got '" +
                                     std::string(text) + "'");
}

std::optional<bool> parse_optional_flag(std::string_view text, std::size_t line_no,
                                        std::string_view field) {
  if (text.empty()) return std::nullopt;
  return parse_flag(text, line_no, field);
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  return in;
}

}  // namespace

const char* to_string(StatementGroup group) {
  switch (group) {
    case StatementGroup::kIncome: return "income";
    case StatementGroup::kBalance: return "balance";
    case StatementGroup::kCashflow: return "cashflow";
    case StatementGroup::kMacro: return "macro";
    case StatementGroup::kMarket: return "market";
  }
  return "?";
}

const char* to_string(Format format) {
  switch (format) {
    case Format::kYoY: return "yoy";
    case Format::kQoQ: return "qoq";
    case Format::kPctAssets: return "pct_assets";
    case Format::kPctRevenue: return "pct_revenue";
    case Format::kRaw: return "raw";
  }
  return "?";
}

StatementGroup parse_statement_group(std::string_view text) {
  for (auto g : {StatementGroup::kIncome, StatementGroup::kBalance, StatementGroup::kCashflow,
                 StatementGroup::kMacro, StatementGroup::kMarket}) {
    if (text == to_string(g)) return g;
  }
  throw Error(ErrorKind::kParse, "unknown statement group '" + std::string(text) + "'");
}

Format parse_format(std::string_view text) {
  for (auto f : {Format::kYoY, Format::kQoQ, Format::kPctAssets, Format::kPctRevenue, Format::kRaw}) {
    if (text == to_string(f)) return f;
  }
  throw Error(ErrorKind::kParse, "unknown format '" + std::string(text) + "'");
}

std::vector<Format> FormatSet::list() const {
  std::vector<Format> out;
  for (auto f : {Format::kYoY, Format::kQoQ, Format::kPctAssets, Format::kPctRevenue, Format::kRaw}) {
    if (contains(f)) out.push_back(f);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Schema

Schema parse_schema(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!csv::next_line(in, line, line_no)) {
    throw Error(ErrorKind::kParse, "schema is empty (missing header)");
  }
  if (header_of(line) != kSchemaHeader) {
    throw Error(ErrorKind::kParse, "line " + std::to_string(line_no) + ": expected header '" +
                                       std::string(kSchemaHeader) + "'");
  }
  Schema schema;
  std::set<std::string, std::less<>> seen;
  while (csv::next_line(in, line, line_no)) {
    const auto fields = csv::split(line);
    if (fields.size() != 8) {
      throw Error(ErrorKind::kParse, "line " + std::to_string(line_no) + ": expected 8 fields, got " +
                                         std::to_string(fields.size()));
    }
    VariableSpec spec;
    spec.name = std::string(fields[0]);
    if (spec.name.empty()) {
      throw Error(ErrorKind::kParse, "line " + std::to_string(line_no) + ": empty variable name");
    }
    try {
      spec.group = parse_statement_group(fields[1]);
    } catch (const Error& e) {
      throw Error(ErrorKind::kParse, "line " + std::to_string(line_no) + ": " + e.what());
    }
    if (parse_flag(fields[2], line_no, "yoy")) spec.formats.insert(Format::kYoY);
    if (parse_flag(fields[3], line_no, "qoq")) spec.formats.insert(Format::kQoQ);
    if (parse_flag(fields[4], line_no, "pct_assets")) spec.formats.insert(Format::kPctAssets);
    if (parse_flag(fields[5], line_no, "pct_revenue")) spec.formats.insert(Format::kPctRevenue);
    spec.crucial = parse_flag(fields[6], line_no, "crucial");
    spec.next_quarter_aligned = parse_flag(fields[7], line_no, "next_quarter_aligned");
    // Scale variables keep their original level; unflagged series are used as-is.
    if (spec.formats.empty() || spec.name == kAssetsVariable || spec.name == kRevenueVariable) {
      spec.formats.insert(Format::kRaw);
    }
    if (!seen.insert(spec.name).second) {
      throw Error(ErrorKind::kDuplicateName,
                  "line " + std::to_string(line_no) + ": variable '" + spec.name + "' declared twice");
    }
    schema.push_back(std::move(spec));
  }
  return schema;
}

Schema load_schema(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_schema(in);
}

void write_schema(const Schema& schema, std::ostream& out) {
  out << kSchemaHeader << '\n';
  for (const auto& v : schema) {
    out << v.name << ',' << to_string(v.group) << ',' << v.formats.contains(Format::kYoY) << ','
        << v.formats.contains(Format::kQoQ) << ',' << v.formats.contains(Format::kPctAssets) << ','
        << v.formats.contains(Format::kPctRevenue) << ',' << v.crucial << ','
        << v.next_quarter_aligned << '\n';
  }
}

const VariableSpec* find_variable(const Schema& schema, std::string_view name) {
  for (const auto& v : schema) {
    if (v.name == name) return &v;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------
// RawPanel

RawPanel::RawPanel(std::vector<std::string> variables, std::vector<PanelKey> keys,
                   std::vector<std::vector<Cell>> columns, CompanyMetaTable meta)
    : variables_(std::move(variables)), meta_(std::move(meta)) {
  if (columns.size() != variables_.size()) {
    throw Error(ErrorKind::kDimensionMismatch, "panel has " + std::to_string(variables_.size()) +
                                                   " variables but " +
                                                   std::to_string(columns.size()) + " columns");
  }
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c].size() != keys.size()) {
      throw Error(ErrorKind::kDimensionMismatch,
                  "column '" + variables_[c] + "' has " + std::to_string(columns[c].size()) +
                      " entries for " + std::to_string(keys.size()) + " keys");
    }
  }
  std::vector<std::size_t> order(keys.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });
  keys_.reserve(keys.size());
  for (auto i : order) keys_.push_back(keys[i]);
  for (std::size_t i = 1; i < keys_.size(); ++i) {
    if (keys_[i] == keys_[i - 1]) {
      throw Error(ErrorKind::kDuplicateName, "duplicate panel key (" + keys_[i].company + ", " +
                                                 keys_[i].quarter.to_string() + ")");
    }
  }
  columns_.resize(columns.size());
  for (std::size_t c = 0; c < columns.size(); ++c) {
    columns_[c].reserve(order.size());
    for (auto i : order) columns_[c].push_back(columns[c][i]);
  }
  build_index();
}

void RawPanel::build_index() {
  index_.clear();
  index_.reserve(keys_.size());
  for (std::size_t i = 0; i < keys_.size(); ++i) index_.emplace(keys_[i], i);
}

std::optional<std::size_t> RawPanel::variable_index(std::string_view name) const {
  for (std::size_t i = 0; i < variables_.size(); ++i) {
    if (variables_[i] == name) return i;
  }
  return std::nullopt;
}

std::span<const Cell> RawPanel::column(std::string_view name) const {
  const auto idx = variable_index(name);
  if (!idx) throw Error(ErrorKind::kUnknownVariable, "panel has no variable '" + std::string(name) + "'");
  return columns_[*idx];
}

std::optional<std::size_t> RawPanel::find_row(const PanelKey& key) const {
  const auto it = index_.find(key);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Cell RawPanel::lookup(std::size_t variable, const CompanyId& company, CalendarQuarter quarter) const {
  const auto row = find_row(PanelKey{company, quarter});
  if (!row) return std::nullopt;
  return columns_[variable][*row];
}

std::vector<CalendarQuarter> RawPanel::quarters() const {
  std::vector<CalendarQuarter> out;
  out.reserve(keys_.size());
  for (const auto& k : keys_) out.push_back(k.quarter);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<CompanyId> RawPanel::companies() const {
  std::vector<CompanyId> out;
  for (const auto& k : keys_) {
    if (out.empty() || out.back() != k.company) out.push_back(k.company);
  }
  return out;
}

RawPanel RawPanel::with_meta(CompanyMetaTable meta) const {
  RawPanel copy = *this;
  copy.meta_ = std::move(meta);
  return copy;
}

RawPanel RawPanel::select_rows(std::span<const std::size_t> rows) const {
  std::vector<PanelKey> keys;
  keys.reserve(rows.size());
  for (auto r : rows) keys.push_back(keys_[r]);
  std::vector<std::vector<Cell>> columns(columns_.size());
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    columns[c].reserve(rows.size());
    for (auto r : rows) columns[c].push_back(columns_[c][r]);
  }
  CompanyMetaTable meta;
  for (const auto& k : keys) {
    if (auto it = meta_.find(k.company); it != meta_.end()) meta.emplace(*it);
  }
  return RawPanel(variables_, std::move(keys), std::move(columns), std::move(meta));
}

RawPanel RawPanel::with_column(std::size_t index, std::vector<Cell> values) const {
  RawPanel copy = *this;
  if (values.size() != keys_.size()) {
    throw Error(ErrorKind::kDimensionMismatch, "replacement column length mismatch");
  }
  copy.columns_.at(index) = std::move(values);
  return copy;
}

// ---------------------------------------------------------------------------
// Panel CSV

RawPanel parse_panel(std::istream& in, const Schema& schema) {
  std::string line;
  std::size_t line_no = 0;
  if (!csv::next_line(in, line, line_no) || header_of(line) != kPanelHeader) {
    throw Error(ErrorKind::kParse, "panel: expected header '" + std::string(kPanelHeader) + "'");
  }
  std::vector<std::string> variables;
  std::unordered_map<std::string, std::size_t> var_index;
  for (const auto& v : schema) {
    var_index.emplace(v.name, variables.size());
    variables.push_back(v.name);
  }

  std::vector<PanelKey> keys;
  std::unordered_map<PanelKey, std::size_t, PanelKeyHash> key_index;
  std::vector<std::vector<Cell>> columns(variables.size());

  while (csv::next_line(in, line, line_no)) {
    const auto fields = csv::split(line);
    if (fields.size() != 5) {
      throw Error(ErrorKind::kParse, "line " + std::to_string(line_no) + ": expected 5 fields, got " +
                                         std::to_string(fields.size()));
    }
    const auto year = csv::parse_int(fields[1]);
    const auto quarter = csv::parse_int(fields[2]);
    if (!year || !quarter) {
      throw Error(ErrorKind::kMalformedQuarter, "line " + std::to_string(line_no) +
                                                    ": cannot read year/quarter '" +
                                                    std::string(fields[1]) + "','" +
                                                    std::string(fields[2]) + "'");
    }
    CalendarQuarter q;
    try {
      q = CalendarQuarter(static_cast<int>(*year), static_cast<int>(*quarter));
    } catch (const Error&) {
      throw Error(ErrorKind::kMalformedQuarter,
                  "line " + std::to_string(line_no) + ": quarter " + std::to_string(*quarter));
    }
    const auto var = var_index.find(std::string(fields[3]));
    if (var == var_index.end()) {
      throw Error(ErrorKind::kUnknownVariable, "line " + std::to_string(line_no) + ": variable '" +
                                                   std::string(fields[3]) + "' not in schema");
    }
    Cell value;
    if (!fields[4].empty()) {
      value = csv::parse_double(fields[4]);
      if (!value) {
        throw Error(ErrorKind::kParse, "line " + std::to_string(line_no) + ": bad value '" +
                                           std::string(fields[4]) + "'");
      }
    }
    PanelKey key{std::string(fields[0]), q};
    auto [it, inserted] = key_index.emplace(key, keys.size());
    if (inserted) {
      keys.push_back(std::move(key));
      for (auto& col : columns) col.emplace_back();
    }
    auto& cell = columns[var->second][it->second];
    if (cell && value && *cell != *value) {
      throw Error(ErrorKind::kParse, "line " + std::to_string(line_no) + ": conflicting value for " +
                                         std::string(fields[3]) + " at " + std::string(fields[0]) +
                                         " " + q.to_string());
    }
    if (value) cell = value;
  }
  return RawPanel(std::move(variables), std::move(keys), std::move(columns));
}

RawPanel load_panel(const std::filesystem::path& path, const Schema& schema) {
  auto in = open_input(path);
  return parse_panel(in, schema);
}

void write_panel(const RawPanel& panel, std::ostream& out) {
  out << kPanelHeader << '\n';
  const auto keys = panel.keys();
  const auto vars = panel.variables();
  for (std::size_t r = 0; r < keys.size(); ++r) {
    for (std::size_t v = 0; v < vars.size(); ++v) {
      out << keys[r].company << ',' << keys[r].quarter.year() << ',' << keys[r].quarter.quarter()
          << ',' << vars[v] << ',';
      if (const auto& cell = panel.column(v)[r]) out << csv::format_double(*cell);
      out << '\n';
    }
  }
}

void write_panel(const RawPanel& panel, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  write_panel(panel, out);
}

CompanyMetaTable parse_company_meta(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!csv::next_line(in, line, line_no) || header_of(line) != kMetaHeader) {
    throw Error(ErrorKind::kParse, "companies: expected header '" + std::string(kMetaHeader) + "'");
  }
  CompanyMetaTable table;
  while (csv::next_line(in, line, line_no)) {
    const auto f = csv::split(line);
    if (f.size() != 5) {
      throw Error(ErrorKind::kParse, "line " + std::to_string(line_no) + ": expected 5 fields");
    }
    CompanyMeta meta;
    if (!f[1].empty()) {
      const auto sector = csv::parse_int(f[1]);
      if (!sector) throw Error(ErrorKind::kParse, "line " + std::to_string(line_no) + ": bad sector_code");
      meta.sector_code = static_cast<int>(*sector);
    }
    if (!f[2].empty()) {
      meta.min_share_price = csv::parse_double(f[2]);
      if (!meta.min_share_price) {
        throw Error(ErrorKind::kParse, "line " + std::to_string(line_no) + ": bad min_share_price");
      }
    }
    meta.fiscal_alignment = parse_optional_flag(f[3], line_no, "fiscal_alignment_flag");
    meta.reporting_gap = parse_optional_flag(f[4], line_no, "reporting_gap_flag");
    if (!table.emplace(std::string(f[0]), meta).second) {
      throw Error(ErrorKind::kDuplicateName,
                  "line " + std::to_string(line_no) + ": company '" + std::string(f[0]) + "' listed twice");
    }
  }
  return table;
}

CompanyMetaTable load_company_meta(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_company_meta(in);
}

void write_company_meta(const CompanyMetaTable& meta, std::ostream& out) {
  out << kMetaHeader << '\n';
  for (const auto& [id, m] : meta) {
    out << id << ',';
    if (m.sector_code) out << *m.sector_code;
    out << ',';
    if (m.min_share_price) out << csv::format_double(*m.min_share_price);
    out << ',';
    if (m.fiscal_alignment) out << (*m.fiscal_alignment ? 1 : 0);
    out << ',';
    if (m.reporting_gap) out << (*m.reporting_gap ? 1 : 0);
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Filters and alignment

RawPanel apply_sample_filters(const RawPanel& panel, const FilterRules& rules) {
  auto passes = [&](const CompanyId& id) {
    if (rules.require_company_id && csv::trim(id).empty()) return false;
    const auto it = panel.meta().find(id);
    if (it == panel.meta().end()) return true;
    const auto& m = it->second;
    if (rules.min_share_price && m.min_share_price && *m.min_share_price < *rules.min_share_price) {
      return false;
    }
    if (m.sector_code && rules.excluded_sectors.contains(*m.sector_code)) return false;
    if (rules.require_fiscal_alignment && m.fiscal_alignment && !*m.fiscal_alignment) return false;
    if (rules.drop_reporting_gaps && m.reporting_gap && *m.reporting_gap) return false;
    return true;
  };
  std::vector<std::size_t> keep;
  const auto keys = panel.keys();
  std::optional<bool> current;
  for (std::size_t r = 0; r < keys.size(); ++r) {
    if (r == 0 || keys[r].company != keys[r - 1].company) current = passes(keys[r].company);
    if (*current) keep.push_back(r);
  }
  if (keep.size() == keys.size()) return panel;
  return panel.select_rows(keep);
}

RawPanel shift_forward_aligned(const RawPanel& panel, const Schema& schema) {
  RawPanel out = panel;
  const auto keys = panel.keys();
  for (const auto& spec : schema) {
    if (!spec.next_quarter_aligned) continue;
    const auto idx = panel.variable_index(spec.name);
    if (!idx) continue;
    std::vector<Cell> shifted(keys.size());
    for (std::size_t r = 0; r < keys.size(); ++r) {
      shifted[r] = panel.lookup(*idx, keys[r].company, keys[r].quarter.succ());
    }
    out = out.with_column(*idx, std::move(shifted));
  }
  return out;
}

}  // namespace earncast
