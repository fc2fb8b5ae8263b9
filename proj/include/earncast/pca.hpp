#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "earncast/matrix.hpp"

namespace earncast {

struct PcaOptions {
  /// Divide each centered column by its standard deviation before the
  /// decomposition (constant columns keep scale 1).
  bool standardize = false;
};

struct PcaModel {
  std::vector<double> mean;
  /// Empty unless fitted with standardize.
  std::vector<double> scale;
  /// d x d, column i is the eigenvector of eigenvalues[i].
  Matrix loadings;
  std::vector<double> eigenvalues;
  std::vector<double> explained_ratio;
  std::size_t kept = 0;

  std::size_t dim() const { return mean.size(); }
  bool operator==(const PcaModel&) const = default;
};

PcaModel fit_pca(const Matrix& x, const PcaOptions& options = {});

/// Smallest d' whose cumulative explained ratio reaches threshold.
std::size_t choose_components(const PcaModel& model, double threshold);

/// (x - mean) / scale projected on the first model.kept loadings.
Matrix transform(const PcaModel& model, const Matrix& x);
/// Maps scores from transform back to feature space.
Matrix reconstruct(const PcaModel& model, const Matrix& scores);

/// Sample covariance (1/(m-1)) of the columns of x about the given means.
Matrix covariance(const Matrix& x, std::span<const double> mean);

struct SymmetricEigen {
  std::vector<double> values;  // descending
  Matrix vectors;              // columns, sign-normalized
};

/// Householder tridiagonalization followed by implicit QL.
SymmetricEigen symmetric_eigen(const Matrix& a);

void save_pca(const PcaModel& model, std::ostream& out);
PcaModel load_pca(std::istream& in);
void save_pca(const PcaModel& model, const std::filesystem::path& path);
PcaModel load_pca(const std::filesystem::path& path);

}  // namespace earncast
