#include "earncast/consensus.hpp"

#include <fstream>

#include "csv.hpp"
#include "earncast/error.hpp"

namespace earncast {

namespace {

constexpr std::string_view kConsensusHeader =
    "company_id,year,quarter,consensus_mean,consensus_median,actual_nongaap";

Cell parse_cell(std::string_view text, std::size_t line_no, const char* field) {
  if (text.empty()) return std::nullopt;
  const auto v = csv::parse_double(text);
  if (!v) throw Error(ErrorKind::kParse, "line " + std::to_string(line_no) + ": bad " + field);
  return v;
}

void write_cell(std::ostream& out, const Cell& c) {
  if (c) out << csv::format_double(*c);
}

}  // namespace

ConsensusTable parse_consensus(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!csv::next_line(in, line, line_no)) throw Error(ErrorKind::kParse, "consensus: empty file");
  std::string header;
  for (auto part : csv::split(line)) {
    if (!header.empty()) header += ',';
    header += part;
  }
  if (header != kConsensusHeader) {
    throw Error(ErrorKind::kParse, "consensus: expected header '" + std::string(kConsensusHeader) + "'");
  }
  ConsensusTable table;
  while (csv::next_line(in, line, line_no)) {
    const auto f = csv::split(line);
    if (f.size() != 6) throw Error(ErrorKind::kParse, "line " + std::to_string(line_no) + ": expected 6 fields");
    const auto year = csv::parse_int(f[1]);
    const auto quarter = csv::parse_int(f[2]);
    if (!year || !quarter) throw Error(ErrorKind::kMalformedQuarter, "line " + std::to_string(line_no));
    const PanelKey key{std::string(f[0]), CalendarQuarter(static_cast<int>(*year), static_cast<int>(*quarter))};
    ConsensusRow row{parse_cell(f[3], line_no, "consensus_mean"), parse_cell(f[4], line_no, "consensus_median"),
                     parse_cell(f[5], line_no, "actual_nongaap")};
    if (!table.emplace(key, row).second) {
      throw Error(ErrorKind::kDuplicateName, "line " + std::to_string(line_no) + ": duplicate consensus key");
    }
  }
  return table;
}

ConsensusTable load_consensus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot read " + path.string());
  return parse_consensus(in);
}

void write_consensus(const ConsensusTable& table, std::ostream& out) {
  out << kConsensusHeader << '\n';
  for (const auto& [key, row] : table) {
    out << key.company << ',' << key.quarter.year() << ',' << key.quarter.quarter() << ',';
    write_cell(out, row.consensus_mean);
    out << ',';
    write_cell(out, row.consensus_median);
    out << ',';
    write_cell(out, row.actual_nongaap);
    out << '\n';
  }
}

ConsensusClasses consensus_classes(const ConsensusTable& table, const RawPanel& panel, const LabelSpec& spec,
                                   std::span<const PanelKey> keys, ConsensusStatistic statistic) {
  if (spec.scheme == LabelScheme::kSign && spec.n_classes != 2) {
    throw Error(ErrorKind::kInvalidParams, "sign labels have exactly 2 classes");
  }
  const auto assets = panel.variable_index(kAssetsVariable);
  if (!assets) throw Error(ErrorKind::kMissingDenominator, "consensus targets need 'atq' in the panel");

  auto find = [&](const CompanyId& company, CalendarQuarter q) -> const ConsensusRow* {
    const auto it = table.find(PanelKey{company, q});
    return it == table.end() ? nullptr : &it->second;
  };
  auto estimate = [&](const CompanyId& c, CalendarQuarter q) -> Cell {
    const auto* row = find(c, q);
    if (!row) return std::nullopt;
    return statistic == ConsensusStatistic::kMean ? row->consensus_mean : row->consensus_median;
  };
  auto actual = [&](const CompanyId& c, CalendarQuarter q) -> Cell {
    const auto* row = find(c, q);
    return row ? row->actual_nongaap : std::nullopt;
  };

  std::vector<Cell> cons_target(keys.size());
  std::vector<Cell> actual_target(keys.size());
  ConsensusClasses out;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const auto& [company, q] = keys[i];
    const Cell a = panel.lookup(*assets, company, q);
    if (!a || *a <= 0.0) {
      ++out.skipped;
      continue;
    }
    Cell forecast, realized, base;
    if (spec.horizon == Horizon::kQoQ) {
      forecast = estimate(company, q + 1);
      realized = actual(company, q + 1);
      base = actual(company, q);
    } else {
      double f = 0.0, r = 0.0, b = 0.0;
      bool has_f = true, has_r = true, has_b = true;
      for (int k = 1; k <= 4; ++k) {
        const Cell fk = estimate(company, q + k);
        const Cell rk = actual(company, q + k);
        const Cell bk = actual(company, q + (1 - k));
        has_f = has_f && fk.has_value();
        has_r = has_r && rk.has_value();
        has_b = has_b && bk.has_value();
        if (fk) f += *fk;
        if (rk) r += *rk;
        if (bk) b += *bk;
      }
      if (has_f) forecast = f;
      if (has_r) realized = r;
      if (has_b) base = b;
    }
    if (!base || !forecast || !realized) {
      ++out.skipped;
      continue;
    }
    cons_target[i] = (*forecast - *base) / *a;
    actual_target[i] = (*realized - *base) / *a;
  }
  if (spec.scheme == LabelScheme::kSign) {
    out.consensus = sign_classes(cons_target);
    out.actual = sign_classes(actual_target);
  } else {
    out.consensus = quantile_classes(cons_target, keys, spec.n_classes);
    out.actual = quantile_classes(actual_target, keys, spec.n_classes);
  }
  return out;
}

}  // namespace earncast
