#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "earncast/matrix.hpp"

namespace earncast {

enum class GrowthPolicy { kBestFirst, kLevelWise };

struct HyperParams {
  double learning_rate = 0.1;
  int max_bin = 255;
  int num_leaves = 31;
  int min_data_in_leaf = 20;
  double feature_fraction = 1.0;
  double bagging_fraction = 1.0;
  int bagging_freq = 0;
  double min_gain_to_split = 0.0;
  double lambda_l1 = 0.0;
  double lambda_l2 = 0.0;
  int n_rounds = 200;
  std::uint64_t seed = 0;
  /// Leaves whose hessian sum falls below this are never created.
  double min_sum_hessian = 1e-3;
  std::optional<int> max_depth;
  GrowthPolicy growth = GrowthPolicy::kBestFirst;

  /// Throws Error(kInvalidParams) naming the first bad field.
  void validate() const;
  bool operator==(const HyperParams&) const = default;
};

/// Frozen per-feature bin edges. code(v) = number of edges strictly below v;
/// NaN maps to the reserved missing bin (edges.size() + 1).
struct BinEdges {
  std::vector<std::vector<double>> edges;

  std::size_t features() const { return edges.size(); }
  /// Non-missing bins of feature f.
  int bins(std::size_t f) const { return static_cast<int>(edges[f].size()) + 1; }
  int missing_bin(std::size_t f) const { return static_cast<int>(edges[f].size()) + 1; }
  std::uint16_t code(std::size_t f, double v) const;
  bool operator==(const BinEdges&) const = default;
};

/// Row-major bin codes.
struct BinnedMatrix {
  BinEdges bins;
  std::size_t rows = 0;
  std::vector<std::uint16_t> codes;

  std::size_t cols() const { return bins.features(); }
  std::uint16_t code(std::size_t r, std::size_t f) const { return codes[r * cols() + f]; }
  std::span<const std::uint16_t> row(std::size_t r) const { return {codes.data() + r * cols(), cols()}; }
};

/// Quantile edges over the non-NaN training values: at most max_bin - 1
/// edges, each halfway to the next distinct value.
BinEdges quantile_edges(const Matrix& x, int max_bin);
BinnedMatrix bin_features(const Matrix& x, int max_bin);
BinnedMatrix apply_bins(const BinEdges& bins, const Matrix& x);

struct GradStats {
  double g = 0.0;
  double h = 0.0;
  std::int64_t count = 0;

  GradStats& operator+=(const GradStats& o) {
    g += o.g;
    h += o.h;
    count += o.count;
    return *this;
  }
  friend GradStats operator-(GradStats a, const GradStats& b) {
    a.g -= b.g;
    a.h -= b.h;
    a.count -= b.count;
    return a;
  }
  bool operator==(const GradStats&) const = default;
};

double soft_threshold(double g, double l1);
/// T(G)^2 / (H + l2); zero when the denominator is not positive.
double leaf_score(double g, double h, const HyperParams& params);
/// -T(G) / (H + l2), before the learning rate.
double leaf_weight(double g, double h, const HyperParams& params);
/// score(left) + score(parent - left) - score(parent).
double split_gain(const GradStats& parent, const GradStats& left, const HyperParams& params);

struct SplitCandidate {
  bool valid = false;
  int feature = -1;
  /// Codes <= threshold go left.
  int threshold = 0;
  bool default_left = false;
  double gain = 0.0;
  GradStats left;
  GradStats right;
};

/// Best threshold for one feature's histogram (bins() entries followed by
/// the missing bin). Ties keep the lowest threshold, missing-right first.
SplitCandidate best_split_for_feature(std::span<const GradStats> hist, int feature, const GradStats& parent,
                                      const HyperParams& params);

/// Child < 0 encodes leaf ~child.
struct TreeNode {
  int feature = 0;
  int threshold = 0;
  bool default_left = false;
  int left = -1;
  int right = -1;
  double gain = 0.0;
  std::int64_t count = 0;
  bool operator==(const TreeNode&) const = default;
};

struct Tree {
  std::vector<TreeNode> nodes;
  std::vector<double> leaf_values{0.0};

  int leaf_index(const BinEdges& bins, std::span<const std::uint16_t> codes) const;
  double predict(const BinEdges& bins, std::span<const std::uint16_t> codes) const;
  std::size_t leaves() const { return leaf_values.size(); }
  int depth() const;
  bool operator==(const Tree&) const = default;
};

enum class ImportanceKind { kSplitCount, kTotalGain };

struct GbdtModel {
  int n_classes = 0;
  BinEdges bins;
  std::vector<double> base_score;
  /// trees[round * n_classes + class]
  std::vector<Tree> trees;
  int best_iteration = 0;
  bool single_class = false;
  std::vector<double> train_loss;  // after each kept round
  std::vector<double> valid_loss;

  int rounds() const { return n_classes == 0 ? 0 : static_cast<int>(trees.size()) / n_classes; }
  bool operator==(const GbdtModel&) const = default;
};

struct FitOptions {
  const BinnedMatrix* valid_x = nullptr;
  std::span<const int> valid_y;
  /// Stop when validation log-loss has not improved for this many rounds.
  int early_stopping_rounds = 20;
};

GbdtModel fit(const BinnedMatrix& x, std::span<const int> y, int n_classes, const HyperParams& params,
              const FitOptions& options = {});

/// Raw class scores, rows x n_classes.
Matrix predict_scores(const GbdtModel& model, const BinnedMatrix& x);
Matrix predict_proba(const GbdtModel& model, const BinnedMatrix& x);
/// Bins x with the model's frozen edges first.
Matrix predict_proba(const GbdtModel& model, const Matrix& x);
std::vector<int> predict_class(const Matrix& proba);

std::vector<double> feature_importance(const GbdtModel& model, ImportanceKind kind);

/// Mean multiclass negative log-likelihood, probabilities clamped at 1e-15.
double log_loss(const Matrix& proba, std::span<const int> y);
void softmax_row(std::span<const double> scores, std::span<double> out);

void save_model(const GbdtModel& model, std::ostream& out);
GbdtModel load_model(std::istream& in);
void save_model(const GbdtModel& model, const std::filesystem::path& path);
GbdtModel load_model(const std::filesystem::path& path);

const char* to_string(GrowthPolicy policy);
GrowthPolicy parse_growth_policy(std::string_view text);
const char* to_string(ImportanceKind kind);

}  // namespace earncast
