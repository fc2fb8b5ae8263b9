#include "earncast/config.hpp"

#include <fstream>
#include <sstream>

#include "csv.hpp"
#include "earncast/error.hpp"

namespace earncast {

namespace {

[[noreturn]] void bad(std::string_view key, const std::string& why) {
  throw Error(ErrorKind::kInvalidConfig, std::string(key) + ": " + why);
}

double to_double(std::string_view key, std::string_view v) {
  const auto d = csv::parse_double(v);
  if (!d) bad(key, "expected a number, got '" + std::string(v) + "'");
  return *d;
}

int to_int(std::string_view key, std::string_view v) {
  const auto i = csv::parse_int(v);
  if (!i || *i < -2147483647LL || *i > 2147483647LL) bad(key, "expected an integer, got '" + std::string(v) + "'");
  return static_cast<int>(*i);
}

std::uint64_t to_u64(std::string_view key, std::string_view v) {
  v = csv::trim(v);
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) {
    bad(key, "expected a non-negative integer, got '" + std::string(v) + "'");
  }
  return out;
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  bad(key, "expected true|false, got '" + std::string(v) + "'");
}

std::vector<std::string> to_list(std::string_view v) {
  std::vector<std::string> out;
  if (csv::trim(v).empty()) return out;
  for (auto part : csv::split(v)) out.emplace_back(part);
  return out;
}

Scale to_scale(std::string_view key, std::string_view v) {
  if (v == "linear") return Scale::kLinear;
  if (v == "log") return Scale::kLog;
  if (v == "int" || v == "integer") return Scale::kInteger;
  bad(key, "scale must be linear|log|int, got '" + std::string(v) + "'");
}

const char* scale_name(Scale s) {
  switch (s) {
    case Scale::kLinear: return "linear";
    case Scale::kLog: return "log";
    case Scale::kInteger: return "int";
  }
  return "linear";
}

template <class F>
auto rethrow_as_config(std::string_view key, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kInvalidConfig) throw;
    throw Error(ErrorKind::kInvalidConfig, std::string(key) + ": " + e.what());
  }
}

std::string fmt(double v) { return csv::format_double(v); }

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += ',';
    out += s;
  }
  return out;
}

void apply_synth(SignalSpec& s, std::string_view key, std::string_view name, std::string_view v) {
  if (name == "driver_variables") {
    s.driver_variables = to_list(v);
  } else if (name == "coefficients") {
    s.coefficients.clear();
    for (const auto& c : to_list(v)) s.coefficients.push_back(to_double(key, c));
  } else if (name == "seasonality_amplitude") {
    s.seasonality_amplitude = to_double(key, v);
  } else if (name == "seasonality_dispersion") {
    s.seasonality_dispersion = to_double(key, v);
  } else if (name == "noise_sd") {
    s.noise_sd = to_double(key, v);
  } else if (name == "missing_rate") {
    s.missing_rate = to_double(key, v);
  } else if (name == "n_companies") {
    s.n_companies = to_int(key, v);
  } else if (name == "n_quarters") {
    s.n_quarters = to_int(key, v);
  } else if (name == "seed") {
    s.seed = to_u64(key, v);
  } else if (name == "start") {
    s.start = rethrow_as_config(key, [&] { return CalendarQuarter::parse(v); });
  } else if (name == "n_filler_variables") {
    s.n_filler_variables = to_int(key, v);
  } else if (name == "ratio_phi") {
    s.ratio_phi = to_double(key, v);
  } else if (name == "ratio_seasonality") {
    s.ratio_seasonality = to_double(key, v);
  } else if (name == "consensus_noise_sd") {
    s.consensus_noise_sd = to_double(key, v);
  } else if (name == "filtered_share") {
    s.filtered_share = to_double(key, v);
  } else {
    bad(key, "unknown setting");
  }
}

void apply_filter(FilterRules& f, std::string_view key, std::string_view name, std::string_view v) {
  if (name == "require_company_id") {
    f.require_company_id = to_bool(key, v);
  } else if (name == "min_share_price") {
    if (v == "none") {
      f.min_share_price.reset();
    } else {
      f.min_share_price = to_double(key, v);
    }
  } else if (name == "excluded_sectors") {
    f.excluded_sectors.clear();
    for (const auto& s : to_list(v)) f.excluded_sectors.insert(to_int(key, s));
  } else if (name == "require_fiscal_alignment") {
    f.require_fiscal_alignment = to_bool(key, v);
  } else if (name == "drop_reporting_gaps") {
    f.drop_reporting_gaps = to_bool(key, v);
  } else {
    bad(key, "unknown setting");
  }
}

void apply_gbdt(PipelineConfig& p, std::string_view key, std::string_view name, std::string_view v) {
  auto& h = p.base_params;
  if (name == "n_rounds") {
    h.n_rounds = to_int(key, v);
  } else if (name == "early_stopping_rounds") {
    p.early_stopping_rounds = to_int(key, v);
  } else if (name == "min_sum_hessian") {
    h.min_sum_hessian = to_double(key, v);
  } else if (name == "max_depth") {
    if (v == "none") {
      h.max_depth.reset();
    } else {
      h.max_depth = to_int(key, v);
    }
  } else if (name == "growth") {
    h.growth = rethrow_as_config(key, [&] { return parse_growth_policy(v); });
  } else if (is_tunable_param(name)) {
    set_param(h, name, to_double(key, v));
  } else {
    bad(key, "unknown setting");
  }
}

void apply_space(SearchSpace& space, std::string_view key, std::string_view name, std::string_view v) {
  if (!is_tunable_param(name)) bad(key, "not a searchable hyperparameter");
  auto& ranges = space.ranges;
  const auto it = std::find_if(ranges.begin(), ranges.end(), [&](const ParamRange& r) { return r.name == name; });
  if (v == "off") {
    if (it != ranges.end()) ranges.erase(it);
    return;
  }
  const auto parts = to_list(v);
  if (parts.size() < 2 || parts.size() > 3) bad(key, "expected 'min,max[,scale]' or 'off'");
  ParamRange r{std::string(name), to_double(key, parts[0]), to_double(key, parts[1]),
               parts.size() == 3 ? to_scale(key, parts[2]) : Scale::kLinear};
  if (it != ranges.end()) {
    *it = r;
  } else {
    ranges.push_back(r);
  }
}

}  // namespace

std::filesystem::path ExperimentConfig::resolve(const std::filesystem::path& p) const {
  if (p.empty() || p.is_absolute()) return p;
  return base_dir / p;
}

void ExperimentConfig::validate() const {
  auto need = [](bool ok, const char* key, const std::string& why) {
    if (!ok) bad(key, why);
  };
  const auto& p = pipeline;
  need(p.label.n_classes >= 2 && p.label.n_classes <= 20, "n_classes", "must be in 2..20");
  need(p.label.scheme != LabelScheme::kSign || p.label.n_classes == 2, "n_classes", "sign labels need n_classes = 2");
  need(p.clip_pct > 0.0 && p.clip_pct <= 1.0, "clip_pct", "must be in (0, 1]");
  need(p.n_lags >= 1 && p.n_lags <= 40, "n_lags", "must be in 1..40");
  need(p.correlation_cutoff > 0.0 && p.correlation_cutoff <= 1.0, "correlation_cutoff", "must be in (0, 1]");
  need(p.pca_threshold > 0.0 && p.pca_threshold <= 1.0, "pca_threshold", "must be in (0, 1]");
  need(p.validation_size >= 1 && p.validation_size <= 20, "validation.size", "must be in 1..20");
  need(p.search_budget >= 1, "search.budget", "must be >= 1");
  need(p.early_stopping_rounds >= 0, "gbdt.early_stopping_rounds", "must be >= 0");
  need(p.top_components >= 1, "top_components", "must be >= 1");
  need(p.top_variables >= 1, "top_variables", "must be >= 1");
  need(p.impute.lookback >= 1, "impute.lookback", "must be >= 1");
  need(p.impute.max_missing_rate >= 0.0 && p.impute.max_missing_rate <= 1.0, "impute.max_missing_rate",
       "must be in [0, 1]");
  need(p.impute.horizon_cap >= 0, "impute.horizon_cap", "must be >= 0");
  need(p.impute.max_p >= 1, "impute.max_p", "must be >= 1");
  need(train_len >= 1, "train_len", "must be >= 1");
  need(subset_start >= 1, "subset_start", "must be >= 1");
  need(!max_subsets || *max_subsets >= 1, "max_subsets", "must be >= 1");
  need(jobs >= 1, "jobs", "must be >= 1");
  rethrow_as_config("search.space", [&] {
    p.space.validate();
    return 0;
  });
  rethrow_as_config("gbdt", [&] {
    p.base_params.validate();
    return 0;
  });
}

void apply_setting(ExperimentConfig& c, std::string_view key, std::string_view value) {
  key = csv::trim(key);
  value = csv::trim(value);
  auto& p = c.pipeline;
  auto prefixed = [&](std::string_view prefix, std::string_view& rest) {
    if (key.substr(0, prefix.size()) != prefix) return false;
    rest = key.substr(prefix.size());
    return true;
  };
  std::string_view rest;
  if (key == "schema") {
    c.schema = std::string(value);
  } else if (key == "panel") {
    c.panel = std::string(value);
  } else if (key == "companies") {
    c.companies = std::string(value);
  } else if (key == "consensus") {
    c.consensus = std::string(value);
  } else if (key == "output_dir") {
    c.output_dir = std::string(value);
  } else if (key == "synth.output_dir") {
    c.synth_output_dir = std::string(value);
  } else if (prefixed("synth.", rest)) {
    apply_synth(c.synth, key, rest, value);
  } else if (prefixed("filters.", rest)) {
    apply_filter(c.filters, key, rest, value);
  } else if (prefixed("gbdt.", rest)) {
    apply_gbdt(p, key, rest, value);
  } else if (prefixed("search.space.", rest)) {
    apply_space(p.space, key, rest, value);
  } else if (key == "search.space") {
    if (value == "default") {
      p.space = SearchSpace::default_box();
    } else if (value == "empty") {
      p.space = SearchSpace{};
    } else {
      bad(key, "expected default|empty");
    }
  } else if (key == "search.budget") {
    p.search_budget = to_int(key, value);
  } else if (key == "search.mode") {
    p.search_mode = rethrow_as_config(key, [&] { return parse_search_mode(value); });
  } else if (key == "validation.size") {
    p.validation_size = to_int(key, value);
  } else if (key == "validation.mode") {
    p.validation_mode = rethrow_as_config(key, [&] { return parse_validation_mode(value); });
  } else if (key == "horizon") {
    p.label.horizon = rethrow_as_config(key, [&] { return parse_horizon(value); });
  } else if (key == "n_classes") {
    p.label.n_classes = to_int(key, value);
  } else if (key == "label_scheme") {
    p.label.scheme = rethrow_as_config(key, [&] { return parse_label_scheme(value); });
  } else if (key == "formula_variant") {
    p.variant = rethrow_as_config(key, [&] { return parse_formula_variant(value); });
  } else if (key == "clip_pct") {
    p.clip_pct = to_double(key, value);
  } else if (key == "impute.lookback") {
    p.impute.lookback = to_int(key, value);
  } else if (key == "impute.max_missing_rate") {
    p.impute.max_missing_rate = to_double(key, value);
  } else if (key == "impute.horizon_cap") {
    p.impute.horizon_cap = to_int(key, value);
  } else if (key == "impute.max_p") {
    p.impute.max_p = to_int(key, value);
  } else if (key == "impute.constant") {
    p.impute.constant = to_double(key, value);
  } else if (key == "n_lags") {
    p.n_lags = to_int(key, value);
  } else if (key == "correlation_cutoff") {
    p.correlation_cutoff = to_double(key, value);
  } else if (key == "pca_threshold") {
    p.pca_threshold = to_double(key, value);
  } else if (key == "standardize") {
    p.standardize = to_bool(key, value);
  } else if (key == "purge_overlap") {
    p.purge_overlap = to_bool(key, value);
  } else if (key == "consensus_actual") {
    p.consensus_actual = rethrow_as_config(key, [&] { return parse_consensus_pairing(value); });
  } else if (key == "top_components") {
    p.top_components = to_int(key, value);
  } else if (key == "top_variables") {
    p.top_variables = to_int(key, value);
  } else if (key == "seed") {
    p.seed = to_u64(key, value);
  } else if (key == "train_len") {
    c.train_len = to_int(key, value);
  } else if (key == "subset_start") {
    c.subset_start = to_int(key, value);
  } else if (key == "max_subsets") {
    if (value == "all") {
      c.max_subsets.reset();
    } else {
      c.max_subsets = to_int(key, value);
    }
  } else if (key == "jobs") {
    c.jobs = to_int(key, value);
  } else if (key == "save_models") {
    c.save_models = to_bool(key, value);
  } else {
    bad(key, "unknown setting");
  }
}

ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir) {
  ExperimentConfig config;
  config.base_dir = base_dir;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = csv::trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorKind::kInvalidConfig, "config line " + std::to_string(line_no) + ": expected key = value");
    }
    try {
      apply_setting(config, view.substr(0, eq), view.substr(eq + 1));
    } catch (const Error& e) {
      throw Error(ErrorKind::kInvalidConfig, "config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  config.validate();
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot read config " + path.string());
  return parse_config(in, path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

std::vector<std::pair<std::string, std::string>> config_echo(const ExperimentConfig& c) {
  std::vector<std::pair<std::string, std::string>> out;
  auto add = [&](std::string key, std::string value) { out.emplace_back(std::move(key), std::move(value)); };
  const auto& p = c.pipeline;
  add("schema", c.schema.string());
  add("panel", c.panel.string());
  add("companies", c.companies.string());
  add("consensus", c.consensus.string());
  add("output_dir", c.output_dir.string());
  add("horizon", to_string(p.label.horizon));
  add("n_classes", std::to_string(p.label.n_classes));
  add("label_scheme", to_string(p.label.scheme));
  add("formula_variant", to_string(p.variant));
  add("clip_pct", fmt(p.clip_pct));
  add("impute.lookback", std::to_string(p.impute.lookback));
  add("impute.max_missing_rate", fmt(p.impute.max_missing_rate));
  add("impute.horizon_cap", std::to_string(p.impute.horizon_cap));
  add("impute.max_p", std::to_string(p.impute.max_p));
  add("impute.constant", fmt(p.impute.constant));
  add("n_lags", std::to_string(p.n_lags));
  add("correlation_cutoff", fmt(p.correlation_cutoff));
  add("pca_threshold", fmt(p.pca_threshold));
  add("standardize", p.standardize ? "true" : "false");
  add("train_len", std::to_string(c.train_len));
  add("subset_start", std::to_string(c.subset_start));
  add("max_subsets", c.max_subsets ? std::to_string(*c.max_subsets) : "all");
  add("validation.size", std::to_string(p.validation_size));
  add("validation.mode", to_string(p.validation_mode));
  add("search.budget", std::to_string(p.search_budget));
  add("search.mode", to_string(p.search_mode));
  add("search.space", "empty");
  for (const auto& r : p.space.ranges) {
    add("search.space." + r.name, fmt(r.min) + "," + fmt(r.max) + "," + scale_name(r.scale));
  }
  const auto& h = p.base_params;
  for (const char* name : {"learning_rate", "max_bin", "num_leaves", "min_data_in_leaf", "feature_fraction",
                           "bagging_fraction", "bagging_freq", "min_gain_to_split", "lambda_l1", "lambda_l2"}) {
    add(std::string("gbdt.") + name, fmt(get_param(h, name)));
  }
  add("gbdt.n_rounds", std::to_string(h.n_rounds));
  add("gbdt.early_stopping_rounds", std::to_string(p.early_stopping_rounds));
  add("gbdt.min_sum_hessian", fmt(h.min_sum_hessian));
  add("gbdt.max_depth", h.max_depth ? std::to_string(*h.max_depth) : "none");
  add("gbdt.growth", to_string(h.growth));
  add("purge_overlap", p.purge_overlap ? "true" : "false");
  add("consensus_actual", to_string(p.consensus_actual));
  add("top_components", std::to_string(p.top_components));
  add("top_variables", std::to_string(p.top_variables));
  add("seed", std::to_string(p.seed));
  add("save_models", c.save_models ? "true" : "false");
  const auto& f = c.filters;
  add("filters.require_company_id", f.require_company_id ? "true" : "false");
  add("filters.min_share_price", f.min_share_price ? fmt(*f.min_share_price) : "none");
  std::vector<std::string> sectors;
  for (int s : f.excluded_sectors) sectors.push_back(std::to_string(s));
  add("filters.excluded_sectors", join(sectors));
  add("filters.require_fiscal_alignment", f.require_fiscal_alignment ? "true" : "false");
  add("filters.drop_reporting_gaps", f.drop_reporting_gaps ? "true" : "false");
  const auto& s = c.synth;
  add("synth.output_dir", c.synth_output_dir.string());
  add("synth.driver_variables", join(s.driver_variables));
  std::vector<std::string> coefs;
  for (double v : s.coefficients) coefs.push_back(fmt(v));
  add("synth.coefficients", join(coefs));
  add("synth.seasonality_amplitude", fmt(s.seasonality_amplitude));
  add("synth.seasonality_dispersion", fmt(s.seasonality_dispersion));
  add("synth.noise_sd", fmt(s.noise_sd));
  add("synth.missing_rate", fmt(s.missing_rate));
  add("synth.n_companies", std::to_string(s.n_companies));
  add("synth.n_quarters", std::to_string(s.n_quarters));
  add("synth.seed", std::to_string(s.seed));
  add("synth.start", s.start.to_string());
  add("synth.n_filler_variables", std::to_string(s.n_filler_variables));
  add("synth.ratio_phi", fmt(s.ratio_phi));
  add("synth.ratio_seasonality", fmt(s.ratio_seasonality));
  add("synth.consensus_noise_sd", fmt(s.consensus_noise_sd));
  add("synth.filtered_share", fmt(s.filtered_share));
  return out;
}

void write_config(const ExperimentConfig& config, std::ostream& out) {
  for (const auto& [key, value] : config_echo(config)) out << key << " = " << value << '\n';
}

}  // namespace earncast
