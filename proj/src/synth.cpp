#include "earncast/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "csv.hpp"
#include "earncast/error.hpp"
#include "earncast/rng.hpp"

namespace earncast {

namespace {

struct RatioVariable {
  const char* name;
  StatementGroup group;
  bool over_revenue;  // else over assets
  double mean;
  double sd;
};

const RatioVariable kCatalog[] = {
    {"xsgaq", StatementGroup::kIncome, true, 0.20, 0.04},
    {"invtq", StatementGroup::kBalance, false, 0.15, 0.04},
    {"cogsq", StatementGroup::kIncome, true, 0.60, 0.05},
    {"rectq", StatementGroup::kBalance, false, 0.18, 0.04},
    {"dpq", StatementGroup::kIncome, false, 0.010, 0.003},
    {"apq", StatementGroup::kBalance, false, 0.10, 0.03},
    {"txtq", StatementGroup::kIncome, true, 0.05, 0.015},
    {"cheq", StatementGroup::kBalance, false, 0.12, 0.05},
    {"dlttq", StatementGroup::kBalance, false, 0.25, 0.08},
    {"xintq", StatementGroup::kIncome, false, 0.005, 0.002},
    {"capxy", StatementGroup::kCashflow, false, 0.02, 0.008},
    {"lctq", StatementGroup::kBalance, false, 0.30, 0.06},
    {"oancfy", StatementGroup::kCashflow, false, 0.03, 0.015},
    {"xrdq", StatementGroup::kIncome, true, 0.04, 0.015},
    {"ppentq", StatementGroup::kBalance, false, 0.35, 0.10},
    {"spiq", StatementGroup::kIncome, false, 0.0, 0.003},
};

constexpr int kBurnIn = 8;
constexpr double kBaseMargin = 0.015;
constexpr const char* kMacroVariable = "gdpq";
constexpr const char* kMarketVariable = "prccq";

const RatioVariable& catalog_entry(std::string_view name) {
  for (const auto& v : kCatalog)
    if (name == v.name) return v;
  throw Error(ErrorKind::kInvalidSpec, "unknown synthetic variable '" + std::string(name) + "'");
}

double season(CalendarQuarter q) {
  static constexpr double kPattern[] = {1.0, 0.0, -1.0, 0.0};
  return kPattern[q.quarter() - 1];
}

std::string company_name(int i) {
  std::string digits = std::to_string(i + 1);
  return "C" + std::string(digits.size() < 5 ? 5 - digits.size() : 0, '0') + digits;
}

}  // namespace

std::vector<std::string> synthetic_ratio_catalog() {
  std::vector<std::string> out;
  for (const auto& v : kCatalog) out.emplace_back(v.name);
  return out;
}

void SignalSpec::validate() const {
  auto bad = [](const std::string& msg) { throw Error(ErrorKind::kInvalidSpec, msg); };
  if (n_quarters < 25) bad("n_quarters must be >= 25, got " + std::to_string(n_quarters));
  if (n_companies < 1 || n_companies > 99999) bad("n_companies must be in 1..99999");
  if (driver_variables.size() != coefficients.size()) bad("driver_variables and coefficients differ in length");
  std::set<std::string> seen;
  for (const auto& d : driver_variables) {
    catalog_entry(d);
    if (!seen.insert(d).second) bad("driver '" + d + "' listed twice");
  }
  if (n_filler_variables < 0) bad("n_filler_variables must be >= 0");
  if (driver_variables.size() + static_cast<std::size_t>(n_filler_variables) > std::size(kCatalog)) {
    bad("at most " + std::to_string(std::size(kCatalog)) + " ratio variables are available");
  }
  if (!(missing_rate >= 0.0 && missing_rate <= 1.0)) bad("missing_rate must be in [0, 1]");
  if (!(filtered_share >= 0.0 && filtered_share <= 1.0)) bad("filtered_share must be in [0, 1]");
  if (!(noise_sd >= 0.0) || !(consensus_noise_sd >= 0.0) || !(seasonality_dispersion >= 0.0)) {
    bad("noise levels and seasonality_dispersion must be >= 0");
  }
  if (!(ratio_phi > -1.0 && ratio_phi < 1.0)) bad("ratio_phi must be in (-1, 1)");
  if (!(ratio_seasonality >= 0.0)) bad("ratio_seasonality must be >= 0");
}

SyntheticData generate_panel(const SignalSpec& spec) {
  spec.validate();

  std::vector<const RatioVariable*> ratios;
  for (const auto& d : spec.driver_variables) ratios.push_back(&catalog_entry(d));
  for (const auto& v : kCatalog) {
    if (static_cast<int>(ratios.size()) >= static_cast<int>(spec.driver_variables.size()) + spec.n_filler_variables) {
      break;
    }
    if (std::find(ratios.begin(), ratios.end(), &v) == ratios.end()) ratios.push_back(&v);
  }
  const auto n_drivers = spec.driver_variables.size();

  SyntheticData data;
  auto& schema = data.schema;
  schema.push_back({kAssetsVariable, StatementGroup::kBalance, {Format::kQoQ, Format::kRaw}, true, false});
  schema.push_back(
      {kRevenueVariable, StatementGroup::kIncome, {Format::kQoQ, Format::kPctAssets, Format::kRaw}, true, false});
  schema.push_back(
      {kNetIncomeVariable, StatementGroup::kIncome, {Format::kYoY, Format::kQoQ, Format::kPctAssets}, true, false});
  for (const auto* r : ratios) {
    schema.push_back({r->name, r->group, {r->over_revenue ? Format::kPctRevenue : Format::kPctAssets}, false, false});
  }
  schema.push_back({kMacroVariable, StatementGroup::kMacro, {Format::kRaw}, false, true});
  schema.push_back({kMarketVariable, StatementGroup::kMarket, {Format::kRaw}, false, false});

  std::vector<std::string> variables;
  for (const auto& v : schema) variables.push_back(v.name);
  const std::size_t n_vars = variables.size();
  const std::size_t first_ratio = 3;
  const std::size_t macro_col = n_vars - 2;
  const std::size_t market_col = n_vars - 1;

  const auto total = static_cast<std::size_t>(kBurnIn + spec.n_quarters);
  std::vector<double> gdp(total);
  {
    Rng rng(Rng::mix(spec.seed, 0xC0FFEE));
    double g = 0.005;
    for (auto& v : gdp) {
      g = 0.005 + 0.5 * (g - 0.005) + 0.004 * rng.normal();
      v = g;
    }
  }

  const double innovation = std::sqrt(1.0 - spec.ratio_phi * spec.ratio_phi);
  std::vector<PanelKey> keys;
  std::vector<std::vector<Cell>> columns(n_vars);
  CompanyMetaTable meta;

  for (int c = 0; c < spec.n_companies; ++c) {
    const CompanyId id = company_name(c);
    Rng rng(Rng::mix(spec.seed, static_cast<std::uint64_t>(c) + 1));

    CompanyMeta m;
    static constexpr int kSectors[] = {10, 15, 20, 25, 30, 35, 45, 50, 60};
    m.sector_code = kSectors[rng.uniform_int(0, std::size(kSectors) - 1)];
    if (rng.uniform() < spec.filtered_share) m.sector_code = rng.uniform() < 0.5 ? 40 : 55;
    m.min_share_price = rng.uniform() < spec.filtered_share ? 0.5 : rng.uniform(2.0, 50.0);
    m.fiscal_alignment = !(rng.uniform() < spec.filtered_share);
    m.reporting_gap = rng.uniform() < spec.filtered_share;
    meta.emplace(id, m);

    double log_assets = 0.8 * rng.normal();
    const double drift = 0.01 + 0.005 * rng.normal();
    double turnover_effect = 0.05 * rng.normal();
    double turnover = 0.0;
    double log_price = 3.0 + 0.5 * rng.normal();
    const double amplitude = spec.seasonality_amplitude + spec.seasonality_dispersion * rng.normal();
    std::vector<double> effect(ratios.size());
    std::vector<double> seasonal(ratios.size());
    std::vector<double> deviation(ratios.size());
    std::vector<double> x(ratios.size());
    for (std::size_t k = 0; k < ratios.size(); ++k) {
      effect[k] = 0.7 * ratios[k]->sd * rng.normal();
      seasonal[k] = spec.ratio_seasonality * ratios[k]->sd * rng.normal();
      deviation[k] = ratios[k]->sd * rng.normal();
      x[k] = ratios[k]->mean + effect[k] + deviation[k];
    }
    double prev_assets = std::exp(log_assets);
    std::vector<double> prev_x = x;

    for (std::size_t t = 0; t < total; ++t) {
      log_assets += drift + 0.02 * rng.normal();
      const double assets = std::exp(log_assets);
      turnover = 0.5 * turnover + 0.02 * rng.normal();
      const double revenue = assets * std::max(0.25 + turnover_effect + turnover, 0.01);
      const CalendarQuarter q = spec.start + (static_cast<int>(t) - kBurnIn);
      for (std::size_t k = 0; k < ratios.size(); ++k) {
        deviation[k] = spec.ratio_phi * deviation[k] + ratios[k]->sd * innovation * rng.normal();
        x[k] = ratios[k]->mean + effect[k] + seasonal[k] * season(q) + deviation[k];
      }
      log_price += 0.01 + 0.1 * rng.normal();

      double margin = kBaseMargin + amplitude * season(q);
      for (std::size_t d = 0; d < n_drivers; ++d) {
        margin += spec.coefficients[d] * (prev_x[d] - ratios[d]->mean);
      }
      const double shock = spec.noise_sd * rng.normal();
      const double truth = prev_assets * margin;
      const double income = prev_assets * (margin + shock);
      const double estimate = truth + prev_assets * spec.consensus_noise_sd * rng.normal();
      const double estimate_median = estimate + prev_assets * 0.25 * spec.consensus_noise_sd * rng.normal();
      const double nongaap = truth + 0.5 * (income - truth);

      std::vector<bool> missing(ratios.size());
      for (auto&& flag : missing) flag = rng.uniform() < spec.missing_rate;

      prev_assets = assets;
      prev_x = x;
      if (t < static_cast<std::size_t>(kBurnIn)) continue;

      keys.push_back({id, q});
      columns[0].push_back(assets);
      columns[1].push_back(revenue);
      columns[2].push_back(income);
      for (std::size_t k = 0; k < ratios.size(); ++k) {
        Cell v = x[k] * (ratios[k]->over_revenue ? revenue : assets);
        if (missing[k]) v = std::nullopt;
        columns[first_ratio + k].push_back(v);
      }
      columns[macro_col].push_back(gdp[t]);
      columns[market_col].push_back(std::exp(log_price));
      data.target.push_back(truth);
      data.consensus.emplace(PanelKey{id, q}, ConsensusRow{estimate, estimate_median, nongaap});
    }
  }

  data.panel = RawPanel(std::move(variables), std::move(keys), std::move(columns), std::move(meta));
  return data;
}

void write_synthetic(const SyntheticData& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name);
    if (!out) throw Error(ErrorKind::kIo, "cannot write " + (dir / name).string());
    return out;
  };
  {
    auto out = open("schema.csv");
    write_schema(data.schema, out);
  }
  {
    auto out = open("panel.csv");
    write_panel(data.panel, out);
  }
  {
    auto out = open("companies.csv");
    write_company_meta(data.panel.meta(), out);
  }
  {
    auto out = open("consensus.csv");
    write_consensus(data.consensus, out);
  }
  {
    auto out = open("truth.csv");
    out << "company_id,year,quarter,target_niq\n";
    const auto keys = data.panel.keys();
    for (std::size_t i = 0; i < keys.size(); ++i) {
      out << keys[i].company << ',' << keys[i].quarter.year() << ',' << keys[i].quarter.quarter() << ','
          << csv::format_double(data.target[i]) << '\n';
    }
  }
}

}  // namespace earncast
