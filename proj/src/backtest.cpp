#include "earncast/backtest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <istream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "earncast/error.hpp"
#include "json_util.hpp"

namespace earncast {

using json = nlohmann::ordered_json;

namespace {

std::optional<double> ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

int horizon_length(Horizon h) { return h == Horizon::kQoQ ? 1 : 4; }

std::optional<double> match_rate(std::span<const std::optional<int>> a, std::span<const std::optional<int>> b) {
  std::size_t n = 0, hit = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i] || !b[i]) continue;
    ++n;
    hit += *a[i] == *b[i] ? 1 : 0;
  }
  return ratio(hit, n);
}

void finish(ConditionalMetrics& m) {
  m.converge_model_acc = ratio(m.converge_model_correct, m.n_converge);
  m.converge_consensus_acc = ratio(m.converge_consensus_correct, m.n_converge);
  m.diverge_model_acc = ratio(m.diverge_model_correct, m.n_diverge);
  m.diverge_consensus_acc = ratio(m.diverge_consensus_correct, m.n_diverge);
  m.total_model_acc = ratio(m.converge_model_correct + m.diverge_model_correct, m.n_converge + m.n_diverge);
  m.total_consensus_acc =
      ratio(m.converge_consensus_correct + m.diverge_consensus_correct, m.n_converge + m.n_diverge);
}

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> opt_double(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (v.is_null()) return std::nullopt;
  return v.get<double>();
}

std::string percent(const std::optional<double>& v) {
  if (!v) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f%%", 100.0 * *v);
  return buf;
}

std::string pad(std::string s, std::size_t width, bool left = false) {
  if (s.size() >= width) return s;
  const std::string fill(width - s.size(), ' ');
  return left ? s + fill : fill + s;
}

const char* format_label(int f) {
  static constexpr const char* kLabels[] = {"YoY", "QoQ", "%Assets", "%Revenue", "Raw"};
  return kLabels[f];
}

std::string config_name(const ConfigSummary& c) {
  std::string out = c.horizon == Horizon::kQoQ ? "QoQ" : "YoY";
  out += ' ' + std::to_string(c.n_classes) + "-class";
  if (c.scheme == LabelScheme::kSign) out += " sign";
  return out;
}

}  // namespace

ConsensusPairing parse_consensus_pairing(std::string_view text) {
  if (text == "nongaap") return ConsensusPairing::kNonGaap;
  if (text == "gaap") return ConsensusPairing::kGaap;
  throw Error(ErrorKind::kInvalidConfig, "consensus_actual must be nongaap|gaap, got '" + std::string(text) + "'");
}

const char* to_string(ConsensusPairing pairing) {
  return pairing == ConsensusPairing::kNonGaap ? "nongaap" : "gaap";
}

std::vector<SubsetSplit> enumerate_subsets(std::span<const CalendarQuarter> quarters, int train_len) {
  if (train_len < 1) throw Error(ErrorKind::kInvalidParams, "train_len must be >= 1");
  for (std::size_t i = 1; i < quarters.size(); ++i) {
    if (quarters[i] != quarters[i - 1].succ()) {
      throw Error(ErrorKind::kInvalidParams, "quarters are not consecutive at " + quarters[i].to_string());
    }
  }
  const auto len = static_cast<std::size_t>(train_len);
  if (quarters.size() < len + 1) {
    throw Error(ErrorKind::kInsufficientHistory, std::to_string(quarters.size()) + " quarters available; need " +
                                                     std::to_string(len + 1));
  }
  std::vector<SubsetSplit> out;
  for (std::size_t i = 0; i + len < quarters.size(); ++i) {
    SubsetSplit s;
    s.index = static_cast<int>(i) + 1;
    s.train_quarters.assign(quarters.begin() + static_cast<std::ptrdiff_t>(i),
                            quarters.begin() + static_cast<std::ptrdiff_t>(i + len));
    s.test_quarter = quarters[i + len];
    out.push_back(std::move(s));
  }
  return out;
}

PipelineInputs prepare_inputs(const Schema& schema, const RawPanel& raw, const FilterRules& filters,
                              FormulaVariant variant, std::optional<ConsensusTable> consensus) {
  PipelineInputs out;
  out.panel = shift_forward_aligned(apply_sample_filters(raw, filters), schema);
  out.features = convert_formats(out.panel, schema, variant);
  out.consensus = std::move(consensus);
  return out;
}

// ---------------------------------------------------------------------------
// Metrics

ConditionalMetrics conditional_accuracy(std::span<const std::optional<int>> model_pred,
                                        std::span<const std::optional<int>> consensus_pred,
                                        std::span<const std::optional<int>> model_actual,
                                        std::span<const std::optional<int>> consensus_actual) {
  const auto n = model_pred.size();
  if (consensus_pred.size() != n || model_actual.size() != n || consensus_actual.size() != n) {
    throw Error(ErrorKind::kDimensionMismatch, "conditional_accuracy: vectors differ in length");
  }
  ConditionalMetrics m;
  for (std::size_t i = 0; i < n; ++i) {
    if (!model_pred[i] || !consensus_pred[i] || !model_actual[i] || !consensus_actual[i]) continue;
    const bool model_ok = *model_pred[i] == *model_actual[i];
    const bool consensus_ok = *consensus_pred[i] == *consensus_actual[i];
    if (*model_pred[i] == *consensus_pred[i]) {
      ++m.n_converge;
      m.converge_model_correct += model_ok;
      m.converge_consensus_correct += consensus_ok;
    } else {
      ++m.n_diverge;
      m.diverge_model_correct += model_ok;
      m.diverge_consensus_correct += consensus_ok;
    }
  }
  finish(m);
  return m;
}

ConditionalMetrics conditional_accuracy(std::span<const std::optional<int>> model_pred,
                                        std::span<const std::optional<int>> consensus_pred,
                                        std::span<const std::optional<int>> actual) {
  return conditional_accuracy(model_pred, consensus_pred, actual, actual);
}

// ---------------------------------------------------------------------------
// Importance

int ImportanceDecomposition::total() const {
  int n = 0;
  for (const auto& row : tally)
    for (int v : row) n += v;
  return n;
}

int lag_bucket(int lag) { return std::clamp(lag / 4, 0, kLagBuckets - 1); }

ImportanceDecomposition decompose_importance(const GbdtModel& model, const PcaModel& pca,
                                             std::span<const FeatureColumnMeta> metas, int top_c, int top_v) {
  if (metas.size() != pca.dim()) {
    throw Error(ErrorKind::kDimensionMismatch, "decompose_importance: metas do not match the PCA input");
  }
  if (model.bins.features() != pca.kept) {
    throw Error(ErrorKind::kDimensionMismatch, "decompose_importance: model is not fitted on the kept components");
  }
  ImportanceDecomposition out;
  const auto gain = feature_importance(model, ImportanceKind::kTotalGain);
  std::vector<std::size_t> order(gain.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return gain[a] > gain[b]; });
  order.resize(std::min(order.size(), static_cast<std::size_t>(std::max(top_c, 0))));

  const auto d = pca.dim();
  for (auto c : order) {
    out.top_components.push_back(c);
    out.component_importance.push_back(gain[c]);
    std::vector<std::size_t> cols(d);
    std::iota(cols.begin(), cols.end(), std::size_t{0});
    std::stable_sort(cols.begin(), cols.end(), [&](std::size_t a, std::size_t b) {
      return std::abs(pca.loadings(a, c)) > std::abs(pca.loadings(b, c));
    });
    cols.resize(std::min(d, static_cast<std::size_t>(std::max(top_v, 0))));
    std::vector<std::string> names;
    for (auto j : cols) {
      const auto& meta = metas[j];
      names.push_back(meta.name());
      ++out.tally[static_cast<std::size_t>(lag_bucket(meta.lag))][static_cast<std::size_t>(meta.format)];
      ++out.variable_counts[meta.base_variable];
    }
    out.top_variables.push_back(std::move(names));
  }
  return out;
}

// ---------------------------------------------------------------------------
// One subset

SubsetResult run_subset(const SubsetSplit& split, const PipelineInputs& inputs, const PipelineConfig& config) {
  SubsetResult result;
  result.split = split;
  const auto first = split.first_train();
  const auto last = split.last_train();
  const auto test = split.test_quarter;
  const std::uint64_t subset_seed = Rng::mix(config.seed, static_cast<std::uint64_t>(split.index));

  // Window rows with enough history for the look-back expansion.
  const auto& base = inputs.features;
  const auto window_start = first - (config.n_lags - 1);
  std::vector<std::size_t> window_rows;
  for (std::size_t r = 0; r < base.rows(); ++r) {
    const auto q = base.keys[r].quarter;
    if (q >= window_start && q <= test) window_rows.push_back(r);
  }
  const FeatureMatrix window = base.select_rows(window_rows);

  const FeatureMatrix clipped = clip_outliers(window, ClipOptions{config.clip_pct, last, config.variant});
  ImputeOptions impute_options = config.impute;
  impute_options.fit_until = last;
  const FeatureMatrix filled = impute(clipped, result.fill, impute_options);
  const LagPlan plan = plan_lags(filled.keys, filled.metas, config.n_lags);
  const auto all_metas = lagged_metas(filled, plan);

  std::vector<PanelKey> candidate_keys;
  std::vector<std::size_t> candidate_rows;  // indices into plan.rows
  for (std::size_t i = 0; i < plan.rows.size(); ++i) {
    const auto& key = filled.keys[plan.rows[i]];
    if ((key.quarter >= first && key.quarter <= last) || key.quarter == test) {
      candidate_keys.push_back(key);
      candidate_rows.push_back(i);
    }
  }
  const LabelVector labels = build_labels(inputs.panel, config.label, candidate_keys);

  std::vector<std::size_t> train_rows, test_rows;
  std::vector<PanelKey> train_keys;
  std::vector<int> y_train;
  for (std::size_t i = 0; i < candidate_keys.size(); ++i) {
    const auto& key = candidate_keys[i];
    if (key.quarter == test) {
      test_rows.push_back(candidate_rows[i]);
      result.test_keys.push_back(key);
      result.labels.push_back(labels.values[i]);
      continue;
    }
    if (!labels.values[i]) continue;
    if (config.purge_overlap && key.quarter + horizon_length(config.label.horizon) > test) continue;
    train_rows.push_back(candidate_rows[i]);
    train_keys.push_back(key);
    y_train.push_back(*labels.values[i]);
  }
  result.train_rows = train_rows.size();
  if (train_rows.size() < 2) {
    throw Error(ErrorKind::kInsufficientData, "only " + std::to_string(train_rows.size()) + " labelled training rows");
  }

  Matrix x_train = materialize_lags(filled, plan, train_rows);
  Matrix x_test = materialize_lags(filled, plan, test_rows);
  result.lagged_columns = x_train.cols();
  const auto kept_cols = correlation_keep(x_train, config.correlation_cutoff);
  x_train = x_train.select_cols(kept_cols);
  x_test = x_test.select_cols(kept_cols);
  result.deduped_columns = kept_cols.size();
  std::vector<FeatureColumnMeta> metas;
  for (auto c : kept_cols) metas.push_back(all_metas[c]);

  result.pca = fit_pca(x_train, PcaOptions{config.standardize});
  result.pca.kept = choose_components(result.pca, config.pca_threshold);
  result.pca_kept = result.pca.kept;
  const Matrix z_train = transform(result.pca, x_train);
  const Matrix z_test = transform(result.pca, x_test);
  x_train = Matrix();

  // Hyperparameter search on a held-out slice of the training window.
  const auto vsplit = make_validation_split(train_keys, config.validation_size, config.validation_mode,
                                            Rng::mix(subset_seed, 1));
  const Matrix z_fit = z_train.select_rows(vsplit.train);
  const Matrix z_valid = z_train.select_rows(vsplit.valid);
  std::vector<int> y_fit, y_valid;
  for (auto i : vsplit.train) y_fit.push_back(y_train[i]);
  for (auto i : vsplit.valid) y_valid.push_back(y_train[i]);
  const int k = config.label.n_classes;

  const Objective objective = [&](const HyperParams& params) {
    const BinEdges edges = quantile_edges(z_fit, params.max_bin);
    const BinnedMatrix b_fit = apply_bins(edges, z_fit);
    const BinnedMatrix b_valid = apply_bins(edges, z_valid);
    FitOptions fit_options;
    fit_options.valid_x = &b_valid;
    fit_options.valid_y = y_valid;
    fit_options.early_stopping_rounds = config.early_stopping_rounds;
    const GbdtModel m = fit(b_fit, y_fit, k, params, fit_options);
    auto accuracy = [&](const BinnedMatrix& b, std::span<const int> y) {
      const auto pred = predict_class(predict_proba(m, b));
      std::size_t hit = 0;
      for (std::size_t i = 0; i < y.size(); ++i) hit += pred[i] == y[i] ? 1 : 0;
      return y.empty() ? 0.0 : static_cast<double>(hit) / static_cast<double>(y.size());
    };
    return TrialOutcome{accuracy(b_valid, y_valid), accuracy(b_fit, y_fit), std::max(m.best_iteration, 1)};
  };
  SearchOptions search_options;
  search_options.budget = config.search_budget;
  search_options.seed = Rng::mix(subset_seed, 2);
  search_options.mode = config.search_mode;
  search_options.base = config.base_params;
  auto searched = search(config.space, objective, search_options);
  result.trials = std::move(searched.trials);
  result.best_trial = searched.best_trial;
  result.tuned = searched.best;
  result.tuned.n_rounds = result.trials[static_cast<std::size_t>(searched.best_trial)].best_iteration;

  // Final model on the whole training window.
  const BinEdges edges = quantile_edges(z_train, result.tuned.max_bin);
  result.model = fit(apply_bins(edges, z_train), y_train, k, result.tuned);
  const Matrix proba = predict_proba(result.model, apply_bins(edges, z_test));
  result.predictions = predict_class(proba);

  // Scoring.
  auto& metrics = result.metrics;
  std::vector<std::optional<int>> model_pred(result.predictions.begin(), result.predictions.end());
  std::vector<std::size_t> class_n(static_cast<std::size_t>(k), 0), class_hit(static_cast<std::size_t>(k), 0);
  std::size_t hit = 0;
  for (std::size_t i = 0; i < result.labels.size(); ++i) {
    if (!result.labels[i]) continue;
    const auto c = static_cast<std::size_t>(*result.labels[i]);
    ++metrics.n_scored;
    ++class_n[c];
    if (result.predictions[i] == *result.labels[i]) {
      ++hit;
      ++class_hit[c];
    }
  }
  metrics.accuracy = ratio(hit, metrics.n_scored);
  for (std::size_t c = 0; c < class_n.size(); ++c) metrics.per_class.push_back(ratio(class_hit[c], class_n[c]));
  if (!metrics.accuracy) result.note = "no labelled test rows";

  if (inputs.consensus) {
    const auto mean = consensus_classes(*inputs.consensus, inputs.panel, config.label, result.test_keys,
                                        ConsensusStatistic::kMean);
    const auto median = consensus_classes(*inputs.consensus, inputs.panel, config.label, result.test_keys,
                                          ConsensusStatistic::kMedian);
    const bool nongaap = config.consensus_actual == ConsensusPairing::kNonGaap;
    const auto& paired = nongaap ? mean.actual : result.labels;
    const auto& paired_median = nongaap ? median.actual : result.labels;
    metrics.consensus_accuracy = match_rate(mean.consensus, paired);
    metrics.consensus_median_accuracy = match_rate(median.consensus, paired_median);
    if (metrics.consensus_accuracy) {
      metrics.conditional = conditional_accuracy(model_pred, mean.consensus, result.labels, paired);
    }
  }

  result.importance =
      decompose_importance(result.model, result.pca, metas, config.top_components, config.top_variables);
  return result;
}

std::vector<SubsetResult> run_backtest(std::span<const SubsetSplit> splits, const PipelineInputs& inputs,
                                       const PipelineConfig& config, int jobs,
                                       const std::function<void(const SubsetResult&)>& on_done) {
  std::vector<std::optional<SubsetResult>> results(splits.size());
  std::vector<std::exception_ptr> errors(splits.size());
  std::atomic<std::size_t> next{0};
  std::mutex done_mutex;

  auto worker = [&] {
    while (true) {
      const auto i = next.fetch_add(1);
      if (i >= splits.size()) return;
      try {
        results[i] = run_subset(splits[i], inputs, config);
        if (on_done) {
          std::lock_guard lock(done_mutex);
          on_done(*results[i]);
        }
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto n_threads = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(
      jobs, 1, static_cast<std::ptrdiff_t>(std::max<std::size_t>(splits.size(), 1))));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }

  std::vector<SubsetResult> out;
  for (std::size_t i = 0; i < splits.size(); ++i) {
    if (errors[i]) {
      const std::string where = "subset " + std::to_string(splits[i].index) + ": ";
      try {
        std::rethrow_exception(errors[i]);
      } catch (const Error& e) {
        throw Error(e.kind(), where + e.what());
      } catch (const std::exception& e) {
        throw std::runtime_error(where + e.what());
      }
    }
    out.push_back(std::move(*results[i]));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Records

SubsetRecord make_record(const SubsetResult& result, const PipelineConfig& config,
                         std::vector<std::pair<std::string, std::string>> config_echo) {
  SubsetRecord r;
  r.index = result.split.index;
  r.first_train = result.split.first_train();
  r.last_train = result.split.last_train();
  r.test_quarter = result.split.test_quarter;
  r.horizon = config.label.horizon;
  r.scheme = config.label.scheme;
  r.n_classes = config.label.n_classes;
  r.n_test = result.test_keys.size();
  r.train_rows = result.train_rows;
  r.lagged_columns = result.lagged_columns;
  r.deduped_columns = result.deduped_columns;
  r.pca_kept = result.pca_kept;
  r.metrics = result.metrics;
  r.tuned = result.tuned;
  r.best_iteration = result.model.best_iteration;
  r.importance = result.importance;
  r.config = std::move(config_echo);
  r.note = result.note;
  return r;
}

std::string record_to_json(const SubsetRecord& r) {
  json j;
  j["subset"] = r.index;
  j["first_train"] = r.first_train.to_string();
  j["last_train"] = r.last_train.to_string();
  j["test_quarter"] = r.test_quarter.to_string();
  j["horizon"] = to_string(r.horizon);
  j["scheme"] = to_string(r.scheme);
  j["n_classes"] = r.n_classes;
  j["n_test"] = r.n_test;
  j["n_scored"] = r.metrics.n_scored;
  j["train_rows"] = r.train_rows;
  j["lagged_columns"] = r.lagged_columns;
  j["deduped_columns"] = r.deduped_columns;
  j["pca_kept"] = r.pca_kept;
  j["accuracy"] = opt_json(r.metrics.accuracy);
  json per_class = json::array();
  for (const auto& v : r.metrics.per_class) per_class.push_back(opt_json(v));
  j["per_class_accuracy"] = per_class;
  j["consensus_accuracy"] = opt_json(r.metrics.consensus_accuracy);
  j["consensus_median_accuracy"] = opt_json(r.metrics.consensus_median_accuracy);
  if (r.metrics.conditional) {
    const auto& c = *r.metrics.conditional;
    json cj;
    cj["n_converge"] = c.n_converge;
    cj["n_diverge"] = c.n_diverge;
    cj["converge_model_correct"] = c.converge_model_correct;
    cj["converge_consensus_correct"] = c.converge_consensus_correct;
    cj["diverge_model_correct"] = c.diverge_model_correct;
    cj["diverge_consensus_correct"] = c.diverge_consensus_correct;
    cj["converge_model_acc"] = opt_json(c.converge_model_acc);
    cj["converge_consensus_acc"] = opt_json(c.converge_consensus_acc);
    cj["diverge_model_acc"] = opt_json(c.diverge_model_acc);
    cj["diverge_consensus_acc"] = opt_json(c.diverge_consensus_acc);
    cj["total_model_acc"] = opt_json(c.total_model_acc);
    j["conditional"] = cj;
  } else {
    j["conditional"] = nullptr;
  }
  j["tuned"] = hyperparams_json(r.tuned);
  j["best_iteration"] = r.best_iteration;
  json imp;
  imp["top_components"] = r.importance.top_components;
  imp["component_importance"] = r.importance.component_importance;
  imp["top_variables"] = r.importance.top_variables;
  json tally = json::array();
  for (const auto& row : r.importance.tally) tally.push_back(row);
  imp["tally"] = tally;
  json counts = json::object();
  for (const auto& [name, n] : r.importance.variable_counts) counts[name] = n;
  imp["variable_counts"] = counts;
  j["importance"] = imp;
  json cfg = json::object();
  for (const auto& [key, value] : r.config) cfg[key] = value;
  j["config"] = cfg;
  j["note"] = r.note;
  return j.dump();
}

SubsetRecord record_from_json(std::string_view line, std::size_t line_no) {
  const std::string where = "report line " + std::to_string(line_no) + ": ";
  try {
    const json j = json::parse(line);
    SubsetRecord r;
    r.index = j.at("subset").get<int>();
    r.first_train = CalendarQuarter::parse(j.at("first_train").get<std::string>());
    r.last_train = CalendarQuarter::parse(j.at("last_train").get<std::string>());
    r.test_quarter = CalendarQuarter::parse(j.at("test_quarter").get<std::string>());
    r.horizon = parse_horizon(j.at("horizon").get<std::string>());
    r.scheme = parse_label_scheme(j.at("scheme").get<std::string>());
    r.n_classes = j.at("n_classes").get<int>();
    r.n_test = j.at("n_test").get<std::size_t>();
    r.metrics.n_scored = j.at("n_scored").get<std::size_t>();
    r.train_rows = j.at("train_rows").get<std::size_t>();
    r.lagged_columns = j.at("lagged_columns").get<std::size_t>();
    r.deduped_columns = j.at("deduped_columns").get<std::size_t>();
    r.pca_kept = j.at("pca_kept").get<std::size_t>();
    r.metrics.accuracy = opt_double(j, "accuracy");
    for (const auto& v : j.at("per_class_accuracy")) {
      r.metrics.per_class.push_back(v.is_null() ? std::nullopt : std::optional<double>(v.get<double>()));
    }
    r.metrics.consensus_accuracy = opt_double(j, "consensus_accuracy");
    r.metrics.consensus_median_accuracy = opt_double(j, "consensus_median_accuracy");
    if (!j.at("conditional").is_null()) {
      const auto& cj = j.at("conditional");
      ConditionalMetrics c;
      c.n_converge = cj.at("n_converge").get<std::size_t>();
      c.n_diverge = cj.at("n_diverge").get<std::size_t>();
      c.converge_model_correct = cj.at("converge_model_correct").get<std::size_t>();
      c.converge_consensus_correct = cj.at("converge_consensus_correct").get<std::size_t>();
      c.diverge_model_correct = cj.at("diverge_model_correct").get<std::size_t>();
      c.diverge_consensus_correct = cj.at("diverge_consensus_correct").get<std::size_t>();
      finish(c);
      r.metrics.conditional = c;
    }
    r.tuned = hyperparams_from_json(j.at("tuned"));
    r.best_iteration = j.at("best_iteration").get<int>();
    const auto& imp = j.at("importance");
    r.importance.top_components = imp.at("top_components").get<std::vector<std::size_t>>();
    r.importance.component_importance = imp.at("component_importance").get<std::vector<double>>();
    r.importance.top_variables = imp.at("top_variables").get<std::vector<std::vector<std::string>>>();
    const auto& tally = imp.at("tally");
    if (tally.size() != kLagBuckets) throw Error(ErrorKind::kParse, "tally must have 5 lag buckets");
    for (std::size_t b = 0; b < kLagBuckets; ++b) {
      const auto row = tally[b].get<std::vector<int>>();
      if (row.size() != kFormatCount) throw Error(ErrorKind::kParse, "tally rows must have 5 formats");
      std::copy(row.begin(), row.end(), r.importance.tally[b].begin());
    }
    for (const auto& [name, n] : imp.at("variable_counts").items()) r.importance.variable_counts[name] = n.get<int>();
    for (const auto& [key, value] : j.at("config").items()) r.config.emplace_back(key, value.get<std::string>());
    r.note = j.at("note").get<std::string>();
    return r;
  } catch (const Error& e) {
    throw Error(ErrorKind::kParse, where + e.what());
  } catch (const std::exception& e) {
    throw Error(ErrorKind::kParse, where + e.what());
  }
}

std::vector<SubsetRecord> read_records(std::istream& in) {
  std::vector<SubsetRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(record_from_json(line, line_no));
  }
  if (out.empty()) throw Error(ErrorKind::kMissingRecords, "no subset records found");
  return out;
}

// ---------------------------------------------------------------------------
// Aggregation and rendering

Report aggregate_report(std::span<const SubsetRecord> records) {
  if (records.empty()) throw Error(ErrorKind::kMissingRecords, "no subset records to aggregate");
  Report report;
  for (const auto& r : records) {
    auto it = std::find_if(report.configs.begin(), report.configs.end(), [&](const ConfigSummary& c) {
      return c.horizon == r.horizon && c.scheme == r.scheme && c.n_classes == r.n_classes;
    });
    if (it == report.configs.end()) {
      ConfigSummary c;
      c.horizon = r.horizon;
      c.scheme = r.scheme;
      c.n_classes = r.n_classes;
      report.configs.push_back(c);
      it = report.configs.end() - 1;
    }
    it->subsets += 1;
    it->series.emplace_back(r.test_quarter, r.metrics.accuracy);
    for (std::size_t b = 0; b < kLagBuckets; ++b)
      for (std::size_t f = 0; f < kFormatCount; ++f) it->tally[b][f] += r.importance.tally[b][f];
    for (const auto& [name, n] : r.importance.variable_counts) it->variable_counts[name] += n;
    if (r.metrics.conditional) {
      const auto& c = *r.metrics.conditional;
      auto& p = it->conditional;
      p.n_converge += c.n_converge;
      p.n_diverge += c.n_diverge;
      p.converge_model_correct += c.converge_model_correct;
      p.converge_consensus_correct += c.converge_consensus_correct;
      p.diverge_model_correct += c.diverge_model_correct;
      p.diverge_consensus_correct += c.diverge_consensus_correct;
    }
  }
  for (auto& c : report.configs) {
    double acc = 0.0, cons = 0.0, cons_median = 0.0;
    std::size_t n_acc = 0, n_cons = 0, n_cons_median = 0;
    for (const auto& r : records) {
      if (r.horizon != c.horizon || r.scheme != c.scheme || r.n_classes != c.n_classes) continue;
      if (r.metrics.accuracy) {
        acc += *r.metrics.accuracy;
        ++n_acc;
      }
      if (r.metrics.consensus_accuracy) {
        cons += *r.metrics.consensus_accuracy;
        ++n_cons;
      }
      if (r.metrics.consensus_median_accuracy) {
        cons_median += *r.metrics.consensus_median_accuracy;
        ++n_cons_median;
      }
    }
    c.scored_subsets = n_acc;
    if (n_acc) c.mean_accuracy = acc / static_cast<double>(n_acc);
    if (n_cons) c.mean_consensus_accuracy = cons / static_cast<double>(n_cons);
    if (n_cons_median) c.mean_consensus_median_accuracy = cons_median / static_cast<double>(n_cons_median);
    std::stable_sort(c.series.begin(), c.series.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    finish(c.conditional);
  }
  return report;
}

std::string render_report(const Report& report) {
  std::ostringstream out;
  out << "Average multi-class accuracy over rolling subsets\n";
  out << pad("Configuration", 22, true) << pad("Subsets", 9) << pad("Model", 10) << pad("Consensus", 12)
      << pad("Cons.median", 13) << '\n';
  for (const auto& c : report.configs) {
    out << pad(config_name(c), 22, true) << pad(std::to_string(c.scored_subsets) + "/" + std::to_string(c.subsets), 9)
        << pad(percent(c.mean_accuracy), 10) << pad(percent(c.mean_consensus_accuracy), 12)
        << pad(percent(c.mean_consensus_median_accuracy), 13) << '\n';
  }

  for (const auto& c : report.configs) {
    const auto& m = c.conditional;
    out << "\nAgreement with consensus, " << config_name(c) << '\n';
    out << pad("", 10, true) << pad("Samples", 10) << pad("Model", 10) << pad("Consensus", 12) << '\n';
    if (m.n_converge + m.n_diverge == 0) {
      out << "  consensus unavailable\n";
      continue;
    }
    out << pad("Converge", 10, true) << pad(std::to_string(m.n_converge), 10) << pad(percent(m.converge_model_acc), 10)
        << pad(percent(m.converge_consensus_acc), 12) << '\n';
    out << pad("Diverge", 10, true) << pad(std::to_string(m.n_diverge), 10) << pad(percent(m.diverge_model_acc), 10)
        << pad(percent(m.diverge_consensus_acc), 12) << '\n';
    out << pad("Total", 10, true) << pad(std::to_string(m.n_converge + m.n_diverge), 10)
        << pad(percent(m.total_model_acc), 10) << pad(percent(m.total_consensus_acc), 12) << '\n';
  }

  bool any_sign = false;
  for (const auto& c : report.configs) any_sign = any_sign || c.scheme == LabelScheme::kSign;
  if (any_sign) {
    out << "\nSign accuracy\n";
    out << pad("Horizon", 10, true) << pad("Model", 10) << pad("Consensus", 12) << '\n';
    for (const auto& c : report.configs) {
      if (c.scheme != LabelScheme::kSign) continue;
      out << pad(c.horizon == Horizon::kQoQ ? "QoQ" : "YoY", 10, true) << pad(percent(c.mean_accuracy), 10)
          << pad(percent(c.mean_consensus_accuracy), 12) << '\n';
    }
  }

  for (const auto& c : report.configs) {
    out << "\nImportance decomposition by look-back and format, " << config_name(c) << '\n';
    out << pad("Lags", 8, true);
    for (int f = 0; f < kFormatCount; ++f) out << pad(format_label(f), 10);
    out << pad("Total", 8) << '\n';
    std::array<int, kFormatCount> col_total{};
    int grand = 0;
    for (int b = 0; b < kLagBuckets; ++b) {
      out << pad(std::to_string(4 * b) + "-" + std::to_string(4 * b + 3), 8, true);
      int row_total = 0;
      for (int f = 0; f < kFormatCount; ++f) {
        const int v = c.tally[static_cast<std::size_t>(b)][static_cast<std::size_t>(f)];
        out << pad(std::to_string(v), 10);
        row_total += v;
        col_total[static_cast<std::size_t>(f)] += v;
      }
      grand += row_total;
      out << pad(std::to_string(row_total), 8) << '\n';
    }
    out << pad("Total", 8, true);
    for (int v : col_total) out << pad(std::to_string(v), 10);
    out << pad(std::to_string(grand), 8) << '\n';

    std::vector<std::pair<std::string, int>> vars(c.variable_counts.begin(), c.variable_counts.end());
    std::stable_sort(vars.begin(), vars.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    out << "Variables:";
    for (const auto& [name, n] : vars) out << ' ' << name << '=' << n;
    out << '\n';

    out << "\nPer-quarter accuracy, " << config_name(c) << '\n';
    for (const auto& [q, acc] : c.series) out << "  " << q.to_string() << pad(percent(acc), 9) << '\n';
  }
  return out.str();
}

}  // namespace earncast
