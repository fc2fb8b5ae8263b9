#include "earncast/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "csv.hpp"
#include "earncast/error.hpp"
#include "earncast/rng.hpp"

namespace earncast {

namespace {

constexpr const char* kModelMagic = "earncast-gbdt";
constexpr int kModelVersion = 1;
constexpr double kProbFloor = 1e-15;

void require(bool ok, const char* field, const std::string& rule) {
  if (!ok) throw Error(ErrorKind::kInvalidParams, std::string(field) + " " + rule);
}

struct Leaf {
  std::vector<std::uint32_t> rows;
  GradStats total;
  int depth = 0;
  int parent_node = -1;
  bool is_left = false;
  std::vector<GradStats> hist;
  SplitCandidate best;
};

/// Grows one tree on a fixed gradient vector.
class TreeBuilder {
 public:
  TreeBuilder(const BinnedMatrix& x, const HyperParams& params) : x_(x), params_(params) {
    offsets_.resize(x.cols() + 1, 0);
    for (std::size_t f = 0; f < x.cols(); ++f) {
      offsets_[f + 1] = offsets_[f] + static_cast<std::size_t>(x.bins.bins(f)) + 1;
    }
  }

  Tree grow(std::span<const std::uint32_t> bag, const double* g, const double* h, std::vector<int> features) {
    g_ = g;
    h_ = h;
    features_ = std::move(features);
    leaves_.clear();
    Tree tree;

    Leaf root;
    root.rows.assign(bag.begin(), bag.end());
    build_hist(root);
    for (auto r : root.rows) {
      root.total.g += g_[r];
      root.total.h += h_[r];
    }
    root.total.count = static_cast<std::int64_t>(root.rows.size());
    find_best(root);
    leaves_.push_back(std::move(root));

    const auto budget = static_cast<std::size_t>(params_.num_leaves);
    if (params_.growth == GrowthPolicy::kBestFirst) {
      while (leaves_.size() < budget) {
        int pick = -1;
        for (std::size_t l = 0; l < leaves_.size(); ++l) {
          if (!leaves_[l].best.valid) continue;
          if (pick < 0 || leaves_[l].best.gain > leaves_[static_cast<std::size_t>(pick)].best.gain) {
            pick = static_cast<int>(l);
          }
        }
        if (pick < 0) break;
        split(tree, static_cast<std::size_t>(pick));
      }
    } else {
      std::vector<std::size_t> level{0};
      while (!level.empty() && leaves_.size() < budget) {
        std::vector<std::size_t> next;
        for (auto l : level) {
          if (leaves_.size() >= budget) break;
          if (!leaves_[l].best.valid) continue;
          next.push_back(l);
          next.push_back(split(tree, l));
        }
        level = std::move(next);
      }
    }

    tree.leaf_values.resize(leaves_.size());
    for (std::size_t l = 0; l < leaves_.size(); ++l) {
      tree.leaf_values[l] = leaf_weight(leaves_[l].total.g, leaves_[l].total.h, params_) * params_.learning_rate;
    }
    if (tree.nodes.empty()) tree.leaf_values.assign(1, 0.0);
    return tree;
  }

 private:
  void build_hist(Leaf& leaf) const {
    leaf.hist.assign(offsets_.back(), GradStats{});
    const auto cols = x_.cols();
    for (auto r : leaf.rows) {
      const std::uint16_t* codes = x_.codes.data() + static_cast<std::size_t>(r) * cols;
      const double gr = g_[r];
      const double hr = h_[r];
      for (int f : features_) {
        auto& b = leaf.hist[offsets_[static_cast<std::size_t>(f)] + codes[f]];
        b.g += gr;
        b.h += hr;
        ++b.count;
      }
    }
  }

  void find_best(Leaf& leaf) const {
    leaf.best = SplitCandidate{};
    if (params_.max_depth && leaf.depth >= *params_.max_depth) return;
    if (leaf.total.count < 2 * static_cast<std::int64_t>(params_.min_data_in_leaf)) return;
    for (int f : features_) {
      const auto fu = static_cast<std::size_t>(f);
      const std::span<const GradStats> slice(leaf.hist.data() + offsets_[fu], offsets_[fu + 1] - offsets_[fu]);
      const auto cand = best_split_for_feature(slice, f, leaf.total, params_);
      if (cand.valid && (!leaf.best.valid || cand.gain > leaf.best.gain)) leaf.best = cand;
    }
  }

  /// Splits leaf l in place (it becomes the left child); returns the new
  /// right leaf's index.
  std::size_t split(Tree& tree, std::size_t l) {
    Leaf& leaf = leaves_[l];
    const SplitCandidate c = leaf.best;
    const auto f = static_cast<std::size_t>(c.feature);
    const int missing = x_.bins.missing_bin(f);

    Leaf right;
    std::vector<std::uint32_t> left_rows;
    left_rows.reserve(static_cast<std::size_t>(c.left.count));
    right.rows.reserve(static_cast<std::size_t>(c.right.count));
    for (auto r : leaf.rows) {
      const int code = x_.code(r, f);
      const bool go_left = code == missing ? c.default_left : code <= c.threshold;
      (go_left ? left_rows : right.rows).push_back(r);
    }

    TreeNode node{c.feature, c.threshold, c.default_left, ~static_cast<int>(l),
                  ~static_cast<int>(leaves_.size()), c.gain, leaf.total.count};
    const int node_index = static_cast<int>(tree.nodes.size());
    if (leaf.parent_node >= 0) {
      auto& parent = tree.nodes[static_cast<std::size_t>(leaf.parent_node)];
      (leaf.is_left ? parent.left : parent.right) = node_index;
    }
    tree.nodes.push_back(node);

    right.total = c.right;
    right.depth = leaf.depth + 1;
    right.parent_node = node_index;
    right.is_left = false;

    std::vector<GradStats> parent_hist = std::move(leaf.hist);
    leaf.rows = std::move(left_rows);
    leaf.total = c.left;
    leaf.depth += 1;
    leaf.parent_node = node_index;
    leaf.is_left = true;

    Leaf& small = leaf.rows.size() <= right.rows.size() ? leaf : right;
    Leaf& large = &small == &leaf ? right : leaf;
    build_hist(small);
    large.hist = std::move(parent_hist);
    for (int fi : features_) {
      const auto fu = static_cast<std::size_t>(fi);
      for (std::size_t b = offsets_[fu]; b < offsets_[fu + 1]; ++b) large.hist[b] = large.hist[b] - small.hist[b];
    }
    find_best(leaf);
    find_best(right);
    leaves_.push_back(std::move(right));
    return leaves_.size() - 1;
  }

  const BinnedMatrix& x_;
  const HyperParams& params_;
  std::vector<std::size_t> offsets_;
  const double* g_ = nullptr;
  const double* h_ = nullptr;
  std::vector<int> features_;
  std::vector<Leaf> leaves_;
};

void add_tree_scores(const Tree& tree, const BinnedMatrix& x, Matrix& scores, std::size_t k) {
  if (tree.nodes.empty()) return;
  for (std::size_t r = 0; r < x.rows; ++r) scores(r, k) += tree.predict(x.bins, x.row(r));
}

double scores_loss(const Matrix& scores, std::span<const int> y) {
  const auto k = scores.cols();
  std::vector<double> p(k);
  double total = 0.0;
  for (std::size_t r = 0; r < scores.rows(); ++r) {
    softmax_row(scores.row(r), p);
    total -= std::log(std::max(p[static_cast<std::size_t>(y[r])], kProbFloor));
  }
  return scores.rows() == 0 ? 0.0 : total / static_cast<double>(scores.rows());
}

void check_labels(std::span<const int> y, int n_classes, std::size_t rows) {
  if (y.size() != rows) {
    throw Error(ErrorKind::kDimensionMismatch,
                "labels length " + std::to_string(y.size()) + " != rows " + std::to_string(rows));
  }
  for (int v : y) {
    if (v < 0 || v >= n_classes) throw Error(ErrorKind::kInvalidParams, "label out of range: " + std::to_string(v));
  }
}

void expect_word(std::istream& in, const std::string& word) {
  std::string got;
  if (!(in >> got) || got != word) throw Error(ErrorKind::kParse, "gbdt model: expected '" + word + "'");
}

template <typename T>
T read_value(std::istream& in) {
  std::string tok;
  if (!(in >> tok)) throw Error(ErrorKind::kParse, "gbdt model: truncated");
  if constexpr (std::is_floating_point_v<T>) {
    const auto v = csv::parse_double(tok);
    if (!v) throw Error(ErrorKind::kParse, "gbdt model: bad number '" + tok + "'");
    return *v;
  } else {
    const auto v = csv::parse_int(tok);
    if (!v) throw Error(ErrorKind::kParse, "gbdt model: bad integer '" + tok + "'");
    return static_cast<T>(*v);
  }
}

}  // namespace

void HyperParams::validate() const {
  require(std::isfinite(learning_rate) && learning_rate > 0.0, "learning_rate", "must be > 0");
  require(max_bin >= 2 && max_bin <= 65000, "max_bin", "must be in [2, 65000]");
  require(num_leaves >= 2, "num_leaves", "must be >= 2");
  require(min_data_in_leaf >= 1, "min_data_in_leaf", "must be >= 1");
  require(feature_fraction > 0.0 && feature_fraction <= 1.0, "feature_fraction", "must be in (0, 1]");
  require(bagging_fraction > 0.0 && bagging_fraction <= 1.0, "bagging_fraction", "must be in (0, 1]");
  require(bagging_freq >= 0, "bagging_freq", "must be >= 0");
  require(min_gain_to_split >= 0.0, "min_gain_to_split", "must be >= 0");
  require(lambda_l1 >= 0.0 && std::isfinite(lambda_l1), "lambda_l1", "must be >= 0");
  require(lambda_l2 >= 0.0 && std::isfinite(lambda_l2), "lambda_l2", "must be >= 0");
  require(n_rounds >= 1, "n_rounds", "must be >= 1");
  require(min_sum_hessian >= 0.0, "min_sum_hessian", "must be >= 0");
  require(!max_depth || *max_depth >= 1, "max_depth", "must be >= 1");
}

// ---------------------------------------------------------------------------
// Binning

std::uint16_t BinEdges::code(std::size_t f, double v) const {
  if (std::isnan(v)) return static_cast<std::uint16_t>(missing_bin(f));
  const auto& e = edges[f];
  return static_cast<std::uint16_t>(std::lower_bound(e.begin(), e.end(), v) - e.begin());
}

BinEdges quantile_edges(const Matrix& x, int max_bin) {
  if (max_bin < 2) throw Error(ErrorKind::kInvalidParams, "max_bin must be >= 2");
  BinEdges out;
  out.edges.resize(x.cols());
  std::vector<double> values;
  for (std::size_t f = 0; f < x.cols(); ++f) {
    values.clear();
    for (std::size_t r = 0; r < x.rows(); ++r) {
      const double v = x(r, f);
      if (!std::isnan(v)) values.push_back(v);
    }
    std::sort(values.begin(), values.end());
    auto& edges = out.edges[f];
    const auto n = values.size();
    if (n == 0) continue;
    std::vector<double> distinct;
    std::unique_copy(values.begin(), values.end(), std::back_inserter(distinct));
    auto midpoint_after = [&](double v) -> std::optional<double> {
      const auto it = std::upper_bound(distinct.begin(), distinct.end(), v);
      if (it == distinct.end()) return std::nullopt;
      return v + (*it - v) / 2.0;
    };
    if (distinct.size() <= static_cast<std::size_t>(max_bin)) {
      for (std::size_t i = 0; i + 1 < distinct.size(); ++i) edges.push_back(*midpoint_after(distinct[i]));
      continue;
    }
    for (int j = 1; j < max_bin; ++j) {
      const auto num = static_cast<std::size_t>(j) * n;
      const auto den = static_cast<std::size_t>(max_bin);
      const std::size_t pos = (num + den - 1) / den - 1;
      const auto edge = midpoint_after(values[pos]);
      if (edge && (edges.empty() || *edge > edges.back())) edges.push_back(*edge);
    }
  }
  return out;
}

BinnedMatrix apply_bins(const BinEdges& bins, const Matrix& x) {
  if (x.cols() != bins.features()) {
    throw Error(ErrorKind::kDimensionMismatch, "binning expects " + std::to_string(bins.features()) +
                                                   " features, got " + std::to_string(x.cols()));
  }
  BinnedMatrix out;
  out.bins = bins;
  out.rows = x.rows();
  out.codes.resize(x.rows() * x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t f = 0; f < x.cols(); ++f) out.codes[r * x.cols() + f] = bins.code(f, x(r, f));
  return out;
}

BinnedMatrix bin_features(const Matrix& x, int max_bin) { return apply_bins(quantile_edges(x, max_bin), x); }

// ---------------------------------------------------------------------------
// Gain

double soft_threshold(double g, double l1) {
  if (g > l1) return g - l1;
  if (g < -l1) return g + l1;
  return 0.0;
}

double leaf_score(double g, double h, const HyperParams& params) {
  const double denom = h + params.lambda_l2;
  if (!(denom > 0.0)) return 0.0;
  const double t = soft_threshold(g, params.lambda_l1);
  return t * t / denom;
}

double leaf_weight(double g, double h, const HyperParams& params) {
  const double denom = h + params.lambda_l2;
  if (!(denom > 0.0)) return 0.0;
  return -soft_threshold(g, params.lambda_l1) / denom;
}

double split_gain(const GradStats& parent, const GradStats& left, const HyperParams& params) {
  const GradStats right = parent - left;
  return leaf_score(left.g, left.h, params) + leaf_score(right.g, right.h, params) -
         leaf_score(parent.g, parent.h, params);
}

SplitCandidate best_split_for_feature(std::span<const GradStats> hist, int feature, const GradStats& parent,
                                      const HyperParams& params) {
  SplitCandidate best;
  if (hist.size() < 2) return best;
  const auto nb = static_cast<int>(hist.size()) - 1;
  const GradStats& missing = hist.back();
  const auto min_count = static_cast<std::int64_t>(params.min_data_in_leaf);

  GradStats cumulative;
  for (int t = 0; t < nb; ++t) {
    cumulative += hist[static_cast<std::size_t>(t)];
    for (const bool default_left : {false, true}) {
      if (default_left && missing.count == 0) continue;
      // everything non-missing on the left only separates the missing rows
      if (t == nb - 1 && (default_left || missing.count == 0)) continue;
      GradStats left = cumulative;
      if (default_left) left += missing;
      const GradStats right = parent - left;
      if (left.count < min_count || right.count < min_count) continue;
      if (left.h < params.min_sum_hessian || right.h < params.min_sum_hessian) continue;
      const double gain = split_gain(parent, left, params);
      if (!(gain > params.min_gain_to_split)) continue;
      if (!best.valid || gain > best.gain) {
        best = SplitCandidate{true, feature, t, default_left, gain, left, right};
      }
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Trees

int Tree::leaf_index(const BinEdges& bins, std::span<const std::uint16_t> codes) const {
  if (nodes.empty()) return 0;
  int node = 0;
  while (true) {
    const auto& n = nodes[static_cast<std::size_t>(node)];
    const int code = codes[static_cast<std::size_t>(n.feature)];
    const bool go_left =
        code == bins.missing_bin(static_cast<std::size_t>(n.feature)) ? n.default_left : code <= n.threshold;
    const int next = go_left ? n.left : n.right;
    if (next < 0) return ~next;
    node = next;
  }
}

double Tree::predict(const BinEdges& bins, std::span<const std::uint16_t> codes) const {
  return leaf_values[static_cast<std::size_t>(leaf_index(bins, codes))];
}

int Tree::depth() const {
  if (nodes.empty()) return 0;
  int best = 0;
  std::vector<std::pair<int, int>> stack{{0, 1}};
  while (!stack.empty()) {
    const auto [node, d] = stack.back();
    stack.pop_back();
    best = std::max(best, d);
    const auto& n = nodes[static_cast<std::size_t>(node)];
    if (n.left >= 0) stack.emplace_back(n.left, d + 1);
    if (n.right >= 0) stack.emplace_back(n.right, d + 1);
  }
  return best;
}

// ---------------------------------------------------------------------------
// Boosting

void softmax_row(std::span<const double> scores, std::span<double> out) {
  const double top = *std::max_element(scores.begin(), scores.end());
  double sum = 0.0;
  for (std::size_t k = 0; k < scores.size(); ++k) {
    out[k] = std::exp(scores[k] - top);
    sum += out[k];
  }
  for (auto& v : out) v /= sum;
}

double log_loss(const Matrix& proba, std::span<const int> y) {
  if (proba.rows() != y.size()) throw Error(ErrorKind::kDimensionMismatch, "log_loss: rows != labels");
  if (y.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t r = 0; r < y.size(); ++r) {
    total -= std::log(std::max(proba(r, static_cast<std::size_t>(y[r])), kProbFloor));
  }
  return total / static_cast<double>(y.size());
}

GbdtModel fit(const BinnedMatrix& x, std::span<const int> y, int n_classes, const HyperParams& params,
              const FitOptions& options) {
  params.validate();
  if (n_classes < 2) throw Error(ErrorKind::kInvalidParams, "n_classes must be >= 2");
  check_labels(y, n_classes, x.rows);
  if (x.rows == 0) throw Error(ErrorKind::kInsufficientData, "no training rows");
  const bool has_valid = options.valid_x != nullptr;
  if (has_valid) {
    if (options.valid_x->cols() != x.cols()) throw Error(ErrorKind::kDimensionMismatch, "validation width");
    check_labels(options.valid_y, n_classes, options.valid_x->rows);
  }

  const auto n = x.rows;
  const auto k_classes = static_cast<std::size_t>(n_classes);
  GbdtModel model;
  model.n_classes = n_classes;
  model.bins = x.bins;

  std::vector<double> counts(k_classes, 0.0);
  for (int v : y) counts[static_cast<std::size_t>(v)] += 1.0;
  model.base_score.resize(k_classes);
  for (std::size_t k = 0; k < k_classes; ++k) {
    model.base_score[k] = std::log(std::max(counts[k] / static_cast<double>(n), kProbFloor));
  }
  if (std::count_if(counts.begin(), counts.end(), [](double c) { return c > 0; }) < 2) {
    model.single_class = true;
    return model;
  }

  Matrix scores(n, k_classes);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t k = 0; k < k_classes; ++k) scores(r, k) = model.base_score[k];
  Matrix valid_scores;
  if (has_valid) {
    valid_scores = Matrix(options.valid_x->rows, k_classes);
    for (std::size_t r = 0; r < valid_scores.rows(); ++r)
      for (std::size_t k = 0; k < k_classes; ++k) valid_scores(r, k) = model.base_score[k];
  }

  Rng rng(params.seed);
  TreeBuilder builder(x, params);
  const auto n_features = x.cols();
  const auto per_tree = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(params.feature_fraction * static_cast<double>(n_features))));
  const bool bagging = params.bagging_freq > 0 && params.bagging_fraction < 1.0;
  const auto bag_size =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(params.bagging_fraction * static_cast<double>(n))));

  std::vector<std::uint32_t> bag(n);
  std::iota(bag.begin(), bag.end(), 0u);
  std::vector<double> grad(n * k_classes), hess(n * k_classes);
  std::vector<double> p(k_classes);
  const double hessian_factor = static_cast<double>(n_classes) / static_cast<double>(n_classes - 1);

  double best_valid = std::numeric_limits<double>::infinity();
  int best_round = 0;
  for (int round = 0; round < params.n_rounds; ++round) {
    if (bagging && round % params.bagging_freq == 0) {
      const auto picked = rng.sample_without_replacement(n, bag_size);
      bag.assign(picked.begin(), picked.end());
    }
    for (std::size_t r = 0; r < n; ++r) {
      softmax_row(scores.row(r), p);
      for (std::size_t k = 0; k < k_classes; ++k) {
        const double target = y[r] == static_cast<int>(k) ? 1.0 : 0.0;
        grad[k * n + r] = p[k] - target;
        hess[k * n + r] = hessian_factor * p[k] * (1.0 - p[k]);
      }
    }
    for (std::size_t k = 0; k < k_classes; ++k) {
      std::vector<int> features;
      if (per_tree >= n_features) {
        features.resize(n_features);
        std::iota(features.begin(), features.end(), 0);
      } else {
        for (auto f : rng.sample_without_replacement(n_features, per_tree)) features.push_back(static_cast<int>(f));
      }
      Tree tree = builder.grow(bag, grad.data() + k * n, hess.data() + k * n, std::move(features));
      add_tree_scores(tree, x, scores, k);
      if (has_valid) add_tree_scores(tree, *options.valid_x, valid_scores, k);
      model.trees.push_back(std::move(tree));
    }
    model.train_loss.push_back(scores_loss(scores, y));
    if (has_valid) {
      const double loss = scores_loss(valid_scores, options.valid_y);
      model.valid_loss.push_back(loss);
      if (loss < best_valid) {
        best_valid = loss;
        best_round = round + 1;
      } else if (round + 1 - best_round >= options.early_stopping_rounds) {
        break;
      }
    } else {
      best_round = round + 1;
    }
  }

  model.best_iteration = best_round;
  model.trees.resize(static_cast<std::size_t>(best_round) * k_classes);
  model.train_loss.resize(static_cast<std::size_t>(best_round));
  return model;
}

Matrix predict_scores(const GbdtModel& model, const BinnedMatrix& x) {
  if (x.cols() != model.bins.features()) {
    throw Error(ErrorKind::kDimensionMismatch, "model expects " + std::to_string(model.bins.features()) +
                                                   " features, got " + std::to_string(x.cols()));
  }
  const auto k_classes = static_cast<std::size_t>(model.n_classes);
  Matrix scores(x.rows, k_classes);
  for (std::size_t r = 0; r < x.rows; ++r)
    for (std::size_t k = 0; k < k_classes; ++k) scores(r, k) = model.base_score[k];
  for (std::size_t t = 0; t < model.trees.size(); ++t) add_tree_scores(model.trees[t], x, scores, t % k_classes);
  return scores;
}

Matrix predict_proba(const GbdtModel& model, const BinnedMatrix& x) {
  Matrix scores = predict_scores(model, x);
  std::vector<double> p(scores.cols());
  for (std::size_t r = 0; r < scores.rows(); ++r) {
    softmax_row(scores.row(r), p);
    std::copy(p.begin(), p.end(), scores.row(r).begin());
  }
  return scores;
}

Matrix predict_proba(const GbdtModel& model, const Matrix& x) {
  if (x.cols() != model.bins.features()) {
    throw Error(ErrorKind::kDimensionMismatch, "model expects " + std::to_string(model.bins.features()) +
                                                   " features, got " + std::to_string(x.cols()));
  }
  return predict_proba(model, apply_bins(model.bins, x));
}

std::vector<int> predict_class(const Matrix& proba) {
  std::vector<int> out(proba.rows());
  for (std::size_t r = 0; r < proba.rows(); ++r) {
    const auto row = proba.row(r);
    out[r] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

std::vector<double> feature_importance(const GbdtModel& model, ImportanceKind kind) {
  std::vector<double> out(model.bins.features(), 0.0);
  for (const auto& tree : model.trees) {
    for (const auto& node : tree.nodes) {
      out[static_cast<std::size_t>(node.feature)] += kind == ImportanceKind::kSplitCount ? 1.0 : node.gain;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Text format

void save_model(const GbdtModel& model, std::ostream& out) {
  using csv::format_double;
  out << kModelMagic << ' ' << kModelVersion << '\n';
  out << "n_classes " << model.n_classes << '\n';
  out << "single_class " << (model.single_class ? 1 : 0) << '\n';
  out << "best_iteration " << model.best_iteration << '\n';
  out << "base_score";
  for (double v : model.base_score) out << ' ' << format_double(v);
  out << '\n' << "features " << model.bins.features() << '\n';
  for (const auto& e : model.bins.edges) {
    out << "edges " << e.size();
    for (double v : e) out << ' ' << format_double(v);
    out << '\n';
  }
  out << "trees " << model.trees.size() << '\n';
  for (const auto& tree : model.trees) {
    out << "tree " << tree.nodes.size() << ' ' << tree.leaf_values.size() << '\n';
    for (const auto& n : tree.nodes) {
      out << "node " << n.feature << ' ' << n.threshold << ' ' << (n.default_left ? 1 : 0) << ' ' << n.left << ' '
          << n.right << ' ' << format_double(n.gain) << ' ' << n.count << '\n';
    }
    out << "leaves";
    for (double v : tree.leaf_values) out << ' ' << format_double(v);
    out << '\n';
  }
  out << "train_loss " << model.train_loss.size();
  for (double v : model.train_loss) out << ' ' << format_double(v);
  out << '\n' << "valid_loss " << model.valid_loss.size();
  for (double v : model.valid_loss) out << ' ' << format_double(v);
  out << '\n';
}

GbdtModel load_model(std::istream& in) {
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != kModelMagic) throw Error(ErrorKind::kParse, "not a gbdt model");
  if (version != kModelVersion) throw Error(ErrorKind::kParse, "unsupported gbdt model version");
  GbdtModel model;
  expect_word(in, "n_classes");
  model.n_classes = read_value<int>(in);
  if (model.n_classes < 2) throw Error(ErrorKind::kParse, "gbdt model: n_classes");
  expect_word(in, "single_class");
  model.single_class = read_value<int>(in) != 0;
  expect_word(in, "best_iteration");
  model.best_iteration = read_value<int>(in);
  expect_word(in, "base_score");
  for (int k = 0; k < model.n_classes; ++k) model.base_score.push_back(read_value<double>(in));
  expect_word(in, "features");
  const auto features = read_value<std::size_t>(in);
  model.bins.edges.resize(features);
  for (auto& e : model.bins.edges) {
    expect_word(in, "edges");
    const auto count = read_value<std::size_t>(in);
    for (std::size_t i = 0; i < count; ++i) e.push_back(read_value<double>(in));
  }
  expect_word(in, "trees");
  const auto n_trees = read_value<std::size_t>(in);
  for (std::size_t t = 0; t < n_trees; ++t) {
    expect_word(in, "tree");
    const auto n_nodes = read_value<std::size_t>(in);
    const auto n_leaves = read_value<std::size_t>(in);
    Tree tree;
    for (std::size_t i = 0; i < n_nodes; ++i) {
      expect_word(in, "node");
      TreeNode node;
      node.feature = read_value<int>(in);
      node.threshold = read_value<int>(in);
      node.default_left = read_value<int>(in) != 0;
      node.left = read_value<int>(in);
      node.right = read_value<int>(in);
      node.gain = read_value<double>(in);
      node.count = read_value<std::int64_t>(in);
      if (node.feature < 0 || static_cast<std::size_t>(node.feature) >= features) {
        throw Error(ErrorKind::kParse, "gbdt model: node feature out of range");
      }
      for (int child : {node.left, node.right}) {
        const bool ok = child >= 0 ? static_cast<std::size_t>(child) < n_nodes
                                   : static_cast<std::size_t>(~child) < n_leaves;
        if (!ok) throw Error(ErrorKind::kParse, "gbdt model: dangling child");
      }
      tree.nodes.push_back(node);
    }
    expect_word(in, "leaves");
    tree.leaf_values.clear();
    for (std::size_t i = 0; i < n_leaves; ++i) tree.leaf_values.push_back(read_value<double>(in));
    model.trees.push_back(std::move(tree));
  }
  for (auto* losses : {&model.train_loss, &model.valid_loss}) {
    expect_word(in, losses == &model.train_loss ? "train_loss" : "valid_loss");
    const auto count = read_value<std::size_t>(in);
    for (std::size_t i = 0; i < count; ++i) losses->push_back(read_value<double>(in));
  }
  return model;
}

void save_model(const GbdtModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  save_model(model, out);
}

GbdtModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot read " + path.string());
  return load_model(in);
}

const char* to_string(GrowthPolicy policy) {
  return policy == GrowthPolicy::kBestFirst ? "best_first" : "level_wise";
}

GrowthPolicy parse_growth_policy(std::string_view text) {
  if (text == "best_first" || text == "leaf_wise") return GrowthPolicy::kBestFirst;
  if (text == "level_wise" || text == "depth_wise") return GrowthPolicy::kLevelWise;
  throw Error(ErrorKind::kInvalidConfig, "growth must be best_first|level_wise, got '" + std::string(text) + "'");
}

const char* to_string(ImportanceKind kind) {
  return kind == ImportanceKind::kSplitCount ? "split_count" : "total_gain";
}

}  // namespace earncast
