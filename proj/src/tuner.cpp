#include "earncast/tuner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <set>

#include "earncast/error.hpp"
#include "json_util.hpp"

namespace earncast {

namespace {

struct ParamField {
  const char* name;
  double (*get)(const HyperParams&);
  void (*set)(HyperParams&, double);
};

int as_int(double v) { return static_cast<int>(std::lround(v)); }

const ParamField kFields[] = {
    {"learning_rate", [](const HyperParams& p) { return p.learning_rate; },
     [](HyperParams& p, double v) { p.learning_rate = v; }},
    {"max_bin", [](const HyperParams& p) { return double(p.max_bin); },
     [](HyperParams& p, double v) { p.max_bin = as_int(v); }},
    {"num_leaves", [](const HyperParams& p) { return double(p.num_leaves); },
     [](HyperParams& p, double v) { p.num_leaves = as_int(v); }},
    {"min_data_in_leaf", [](const HyperParams& p) { return double(p.min_data_in_leaf); },
     [](HyperParams& p, double v) { p.min_data_in_leaf = as_int(v); }},
    {"feature_fraction", [](const HyperParams& p) { return p.feature_fraction; },
     [](HyperParams& p, double v) { p.feature_fraction = v; }},
    {"bagging_fraction", [](const HyperParams& p) { return p.bagging_fraction; },
     [](HyperParams& p, double v) { p.bagging_fraction = v; }},
    {"bagging_freq", [](const HyperParams& p) { return double(p.bagging_freq); },
     [](HyperParams& p, double v) { p.bagging_freq = as_int(v); }},
    {"min_gain_to_split", [](const HyperParams& p) { return p.min_gain_to_split; },
     [](HyperParams& p, double v) { p.min_gain_to_split = v; }},
    {"lambda_l1", [](const HyperParams& p) { return p.lambda_l1; },
     [](HyperParams& p, double v) { p.lambda_l1 = v; }},
    {"lambda_l2", [](const HyperParams& p) { return p.lambda_l2; },
     [](HyperParams& p, double v) { p.lambda_l2 = v; }},
};

const ParamField& field(std::string_view name) {
  for (const auto& f : kFields)
    if (name == f.name) return f;
  throw Error(ErrorKind::kInvalidParams, "unknown hyperparameter '" + std::string(name) + "'");
}

}  // namespace

ValidationMode parse_validation_mode(std::string_view text) {
  if (text == "chronological_tail") return ValidationMode::kChronologicalTail;
  if (text == "random_quarters") return ValidationMode::kRandomQuarters;
  throw Error(ErrorKind::kInvalidConfig,
              "validation mode must be chronological_tail|random_quarters, got '" + std::string(text) + "'");
}

const char* to_string(ValidationMode mode) {
  return mode == ValidationMode::kChronologicalTail ? "chronological_tail" : "random_quarters";
}

SearchMode parse_search_mode(std::string_view text) {
  if (text == "random") return SearchMode::kRandom;
  if (text == "adaptive") return SearchMode::kAdaptive;
  throw Error(ErrorKind::kInvalidConfig, "search mode must be random|adaptive, got '" + std::string(text) + "'");
}

const char* to_string(SearchMode mode) { return mode == SearchMode::kRandom ? "random" : "adaptive"; }

ValidationSplit make_validation_split(std::span<const PanelKey> keys, int size_quarters, ValidationMode mode,
                                      std::uint64_t seed) {
  if (size_quarters < 1 || size_quarters > 20) {
    throw Error(ErrorKind::kInvalidParams, "validation size must be 1..20 quarters, got " +
                                               std::to_string(size_quarters));
  }
  std::set<CalendarQuarter> distinct;
  for (const auto& k : keys) distinct.insert(k.quarter);
  const std::vector<CalendarQuarter> quarters(distinct.begin(), distinct.end());
  const auto size = static_cast<std::size_t>(size_quarters);
  if (quarters.size() < size + 1) {
    throw Error(ErrorKind::kWindowTooSmall, "training window spans " + std::to_string(quarters.size()) +
                                                " quarters; validation needs " + std::to_string(size + 1));
  }

  ValidationSplit out;
  if (mode == ValidationMode::kChronologicalTail) {
    out.valid_quarters.assign(quarters.end() - static_cast<std::ptrdiff_t>(size), quarters.end());
  } else {
    Rng rng(seed);
    for (auto i : rng.sample_without_replacement(quarters.size(), size)) out.valid_quarters.push_back(quarters[i]);
  }
  const std::set<CalendarQuarter> held(out.valid_quarters.begin(), out.valid_quarters.end());
  for (std::size_t i = 0; i < keys.size(); ++i) {
    (held.contains(keys[i].quarter) ? out.valid : out.train).push_back(i);
  }
  return out;
}

double get_param(const HyperParams& params, std::string_view name) { return field(name).get(params); }
void set_param(HyperParams& params, std::string_view name, double value) { field(name).set(params, value); }

bool is_tunable_param(std::string_view name) {
  return std::any_of(std::begin(kFields), std::end(kFields), [&](const ParamField& f) { return name == f.name; });
}

SearchSpace SearchSpace::default_box() {
  return SearchSpace{{
      {"learning_rate", 0.6, 1.0, Scale::kLinear},
      {"max_bin", 127, 255, Scale::kInteger},
      {"num_leaves", 50, 200, Scale::kInteger},
      {"min_data_in_leaf", 500, 1400, Scale::kInteger},
      {"feature_fraction", 0.3, 0.8, Scale::kLinear},
      {"bagging_fraction", 0.4, 0.8, Scale::kLinear},
      {"bagging_freq", 2, 8, Scale::kInteger},
      {"min_gain_to_split", 0.5, 0.72, Scale::kLinear},
      {"lambda_l1", 1, 20, Scale::kLinear},
      {"lambda_l2", 350, 450, Scale::kLinear},
  }};
}

ParamRange* SearchSpace::find(std::string_view name) {
  for (auto& r : ranges)
    if (r.name == name) return &r;
  return nullptr;
}

void SearchSpace::validate() const {
  std::set<std::string> seen;
  for (const auto& r : ranges) {
    field(r.name);
    if (!seen.insert(r.name).second) throw Error(ErrorKind::kInvalidParams, "duplicate range " + r.name);
    if (!(r.min <= r.max)) throw Error(ErrorKind::kInvalidParams, r.name + ": min > max");
    if (r.scale == Scale::kLog && !(r.min > 0.0)) {
      throw Error(ErrorKind::kInvalidParams, r.name + ": log scale needs min > 0");
    }
    if (r.scale == Scale::kInteger && std::ceil(r.min) > std::floor(r.max)) {
      throw Error(ErrorKind::kInvalidParams, r.name + ": no integer in range");
    }
  }
}

HyperParams SearchSpace::sample(Rng& rng, const HyperParams& base) const {
  HyperParams out = base;
  for (const auto& r : ranges) {
    double v = r.min;
    switch (r.scale) {
      case Scale::kLinear:
        v = rng.uniform(r.min, r.max);
        break;
      case Scale::kLog:
        v = std::exp(rng.uniform(std::log(r.min), std::log(r.max)));
        v = std::clamp(v, r.min, r.max);
        break;
      case Scale::kInteger:
        v = static_cast<double>(rng.uniform_int(static_cast<std::int64_t>(std::ceil(r.min)),
                                                static_cast<std::int64_t>(std::floor(r.max))));
        break;
    }
    set_param(out, r.name, v);
  }
  return out;
}

bool SearchSpace::contains(const HyperParams& params) const {
  for (const auto& r : ranges) {
    const double v = get_param(params, r.name);
    if (v < r.min || v > r.max) return false;
    if (r.scale == Scale::kInteger && v != std::round(v)) return false;
  }
  return true;
}

SearchSpace refit_space(const SearchSpace& space, std::span<const TrialRecord> trials) {
  std::vector<const TrialRecord*> ok;
  for (const auto& t : trials)
    if (t.validation_metric) ok.push_back(&t);
  if (ok.empty()) return space;
  std::stable_sort(ok.begin(), ok.end(), [](const TrialRecord* a, const TrialRecord* b) {
    return *a->validation_metric > *b->validation_metric;
  });
  const auto top = std::max<std::size_t>(1, (ok.size() + 3) / 4);
  SearchSpace out = space;
  for (auto& r : out.ranges) {
    double lo = get_param(ok[0]->params, r.name);
    double hi = lo;
    for (std::size_t i = 1; i < top; ++i) {
      const double v = get_param(ok[i]->params, r.name);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    r.min = std::max(lo, r.min);
    r.max = std::min(hi, r.max);
  }
  return out;
}

SearchResult search(const SearchSpace& space, const Objective& objective, const SearchOptions& options) {
  if (options.budget < 1) throw Error(ErrorKind::kInvalidParams, "search budget must be >= 1");
  space.validate();
  SearchResult result;
  SearchSpace active = space;
  const int warmup = options.mode == SearchMode::kAdaptive ? std::max(1, options.budget / 2) : options.budget;

  for (int i = 0; i < options.budget; ++i) {
    if (i == warmup) active = refit_space(space, result.trials);
    Rng rng(Rng::mix(options.seed, static_cast<std::uint64_t>(i)));
    TrialRecord trial;
    trial.index = i;
    trial.params = active.sample(rng, options.base);
    trial.params.seed = Rng::mix(options.seed, static_cast<std::uint64_t>(i), 1);
    const auto start = std::chrono::steady_clock::now();
    try {
      const auto outcome = objective(trial.params);
      trial.validation_metric = outcome.validation_metric;
      trial.train_metric = outcome.train_metric;
      trial.best_iteration = outcome.best_iteration;
    } catch (const std::exception& e) {
      trial.error = e.what();
    }
    trial.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (trial.validation_metric &&
        (result.best_trial < 0 ||
         *trial.validation_metric > *result.trials[static_cast<std::size_t>(result.best_trial)].validation_metric)) {
      result.best_trial = i;
    }
    result.trials.push_back(std::move(trial));
  }
  if (result.best_trial < 0) {
    throw Error(ErrorKind::kAllTrialsFailed,
                "all " + std::to_string(options.budget) + " trials failed; first: " + result.trials.front().error);
  }
  result.best = result.trials[static_cast<std::size_t>(result.best_trial)].params;
  return result;
}

void write_trials(std::span<const TrialRecord> trials, std::ostream& out) {
  for (const auto& t : trials) {
    nlohmann::ordered_json j;
    j["trial"] = t.index;
    j["params"] = hyperparams_json(t.params);
    j["validation_metric"] = t.validation_metric ? nlohmann::ordered_json(*t.validation_metric) : nullptr;
    j["train_metric"] = t.train_metric ? nlohmann::ordered_json(*t.train_metric) : nullptr;
    j["best_iteration"] = t.best_iteration;
    j["wall_time"] = t.wall_time;
    if (!t.error.empty()) j["error"] = t.error;
    out << j.dump() << '\n';
  }
}

}  // namespace earncast
