#include "earncast/pca.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>

#include "csv.hpp"
#include "earncast/error.hpp"

namespace earncast {

namespace {

constexpr const char* kPcaMagic = "earncast-pca";
constexpr int kPcaVersion = 1;

// Householder reduction of the symmetric matrix held in v (row-major n x n)
// to tridiagonal form; d receives the diagonal, e the sub-diagonal and v the
// accumulated orthogonal transform.
void tridiagonalize(std::vector<double>& v, std::size_t n, std::vector<double>& d, std::vector<double>& e) {
  auto V = [&](std::size_t r, std::size_t c) -> double& { return v[r * n + c]; };
  for (std::size_t j = 0; j < n; ++j) d[j] = V(n - 1, j);

  for (std::size_t i = n - 1; i > 0; --i) {
    double scale = 0.0;
    double h = 0.0;
    for (std::size_t k = 0; k < i; ++k) scale += std::abs(d[k]);
    if (scale == 0.0) {
      e[i] = d[i - 1];
      for (std::size_t j = 0; j < i; ++j) {
        d[j] = V(i - 1, j);
        V(i, j) = 0.0;
        V(j, i) = 0.0;
      }
    } else {
      for (std::size_t k = 0; k < i; ++k) {
        d[k] /= scale;
        h += d[k] * d[k];
      }
      double f = d[i - 1];
      double g = std::sqrt(h);
      if (f > 0) g = -g;
      e[i] = scale * g;
      h -= f * g;
      d[i - 1] = f - g;
      for (std::size_t j = 0; j < i; ++j) e[j] = 0.0;

      for (std::size_t j = 0; j < i; ++j) {
        f = d[j];
        V(j, i) = f;
        g = e[j] + V(j, j) * f;
        for (std::size_t k = j + 1; k < i; ++k) {
          g += V(k, j) * d[k];
          e[k] += V(k, j) * f;
        }
        e[j] = g;
      }
      f = 0.0;
      for (std::size_t j = 0; j < i; ++j) {
        e[j] /= h;
        f += e[j] * d[j];
      }
      const double hh = f / (h + h);
      for (std::size_t j = 0; j < i; ++j) e[j] -= hh * d[j];
      for (std::size_t j = 0; j < i; ++j) {
        f = d[j];
        g = e[j];
        for (std::size_t k = j; k < i; ++k) V(k, j) -= f * e[k] + g * d[k];
        d[j] = V(i - 1, j);
        V(i, j) = 0.0;
      }
    }
    d[i] = h;
  }

  for (std::size_t i = 0; i + 1 < n; ++i) {
    V(n - 1, i) = V(i, i);
    V(i, i) = 1.0;
    const double h = d[i + 1];
    if (h != 0.0) {
      for (std::size_t k = 0; k <= i; ++k) d[k] = V(k, i + 1) / h;
      for (std::size_t j = 0; j <= i; ++j) {
        double g = 0.0;
        for (std::size_t k = 0; k <= i; ++k) g += V(k, i + 1) * V(k, j);
        for (std::size_t k = 0; k <= i; ++k) V(k, j) -= g * d[k];
      }
    }
    for (std::size_t k = 0; k <= i; ++k) V(k, i + 1) = 0.0;
  }
  for (std::size_t j = 0; j < n; ++j) {
    d[j] = V(n - 1, j);
    V(n - 1, j) = 0.0;
  }
  V(n - 1, n - 1) = 1.0;
  e[0] = 0.0;
}

// Implicit QL with Wilkinson-style shifts on the tridiagonal (d, e).
void tridiagonal_ql(std::vector<double>& v, std::size_t n, std::vector<double>& d, std::vector<double>& e) {
  auto V = [&](std::size_t r, std::size_t c) -> double& { return v[r * n + c]; };
  for (std::size_t i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;

  double f = 0.0;
  double tst1 = 0.0;
  const double eps = std::ldexp(1.0, -52);
  for (std::size_t l = 0; l < n; ++l) {
    tst1 = std::max(tst1, std::abs(d[l]) + std::abs(e[l]));
    std::size_t m = l;
    while (m < n && std::abs(e[m]) > eps * tst1) ++m;

    if (m > l) {
      int iter = 0;
      do {
        if (++iter > 100) throw Error(ErrorKind::kDegenerateInput, "eigensolver failed to converge");
        double g = d[l];
        double p = (d[l + 1] - g) / (2.0 * e[l]);
        double r = std::hypot(p, 1.0);
        if (p < 0) r = -r;
        d[l] = e[l] / (p + r);
        d[l + 1] = e[l] * (p + r);
        const double dl1 = d[l + 1];
        double h = g - d[l];
        for (std::size_t i = l + 2; i < n; ++i) d[i] -= h;
        f += h;

        p = d[m];
        double c = 1.0, c2 = 1.0, c3 = 1.0;
        const double el1 = e[l + 1];
        double s = 0.0, s2 = 0.0;
        for (std::size_t i = m; i-- > l;) {
          c3 = c2;
          c2 = c;
          s2 = s;
          g = c * e[i];
          h = c * p;
          r = std::hypot(p, e[i]);
          e[i + 1] = s * r;
          s = e[i] / r;
          c = p / r;
          p = c * d[i] - s * g;
          d[i + 1] = h + s * (c * g + s * d[i]);
          for (std::size_t k = 0; k < n; ++k) {
            h = V(k, i + 1);
            V(k, i + 1) = s * V(k, i) + c * h;
            V(k, i) = c * V(k, i) - s * h;
          }
        }
        p = -s * s2 * c3 * el1 * e[l] / dl1;
        e[l] = s * p;
        d[l] = c * p;
      } while (std::abs(e[l]) > eps * tst1);
    }
    d[l] += f;
    e[l] = 0.0;
  }
}

void expect_header(std::istream& in, const std::string& key, std::size_t& count) {
  std::string word;
  if (!(in >> word) || word != key || !(in >> count)) {
    throw Error(ErrorKind::kParse, "pca model: expected '" + key + " <n>'");
  }
}

std::vector<double> read_doubles(std::istream& in, std::size_t n) {
  std::vector<double> out(n);
  std::string tok;
  for (auto& v : out) {
    if (!(in >> tok)) throw Error(ErrorKind::kParse, "pca model: truncated");
    const auto parsed = csv::parse_double(tok);
    if (!parsed) throw Error(ErrorKind::kParse, "pca model: bad number '" + tok + "'");
    v = *parsed;
  }
  return out;
}

void write_doubles(std::ostream& out, std::span<const double> values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out << ' ';
    out << csv::format_double(values[i]);
  }
  out << '\n';
}

}  // namespace

SymmetricEigen symmetric_eigen(const Matrix& a) {
  const auto n = a.rows();
  if (a.cols() != n) throw Error(ErrorKind::kDimensionMismatch, "eigen decomposition needs a square matrix");
  SymmetricEigen out;
  if (n == 0) return out;
  std::vector<double> v(a.data().begin(), a.data().end());
  std::vector<double> d(n), e(n);
  tridiagonalize(v, n, d, e);
  tridiagonal_ql(v, n, d, e);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return d[x] > d[y]; });

  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    const auto src = order[j];
    out.values[j] = d[src];
    std::size_t arg = 0;
    for (std::size_t k = 1; k < n; ++k) {
      if (std::abs(v[k * n + src]) > std::abs(v[arg * n + src])) arg = k;
    }
    const double sign = v[arg * n + src] < 0 ? -1.0 : 1.0;
    for (std::size_t k = 0; k < n; ++k) out.vectors(k, j) = sign * v[k * n + src];
  }
  return out;
}

Matrix covariance(const Matrix& x, std::span<const double> mean) {
  const auto m = x.rows();
  const auto d = x.cols();
  Matrix cov(d, d);
  std::vector<double> centered(d);
  for (std::size_t r = 0; r < m; ++r) {
    const auto row = x.row(r);
    for (std::size_t j = 0; j < d; ++j) centered[j] = row[j] - mean[j];
    for (std::size_t i = 0; i < d; ++i) {
      const double ci = centered[i];
      if (ci == 0.0) continue;
      auto out = cov.row(i);
      for (std::size_t j = i; j < d; ++j) out[j] += ci * centered[j];
    }
  }
  const double denom = static_cast<double>(m - 1);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      cov(i, j) /= denom;
      cov(j, i) = cov(i, j);
    }
  }
  return cov;
}

PcaModel fit_pca(const Matrix& x, const PcaOptions& options) {
  const auto m = x.rows();
  const auto d = x.cols();
  if (m < 2) throw Error(ErrorKind::kDegenerateInput, "PCA needs at least 2 rows, got " + std::to_string(m));
  if (d == 0) throw Error(ErrorKind::kDegenerateInput, "PCA needs at least 1 column");
  for (double v : x.data()) {
    if (!std::isfinite(v)) throw Error(ErrorKind::kDegenerateInput, "PCA input has a non-finite value");
  }

  PcaModel model;
  model.mean.assign(d, 0.0);
  for (std::size_t r = 0; r < m; ++r) {
    const auto row = x.row(r);
    for (std::size_t j = 0; j < d; ++j) model.mean[j] += row[j];
  }
  for (auto& v : model.mean) v /= static_cast<double>(m);

  Matrix cov = covariance(x, model.mean);
  if (options.standardize) {
    model.scale.resize(d);
    for (std::size_t j = 0; j < d; ++j) {
      const double sd = std::sqrt(cov(j, j));
      model.scale[j] = sd > 0.0 ? sd : 1.0;
    }
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) cov(i, j) /= model.scale[i] * model.scale[j];
  }

  auto eig = symmetric_eigen(cov);
  double total = 0.0;
  for (auto& v : eig.values) {
    v = std::max(v, 0.0);  // rounding can leave tiny negatives
    total += v;
  }
  if (!(total > 0.0)) throw Error(ErrorKind::kDegenerateInput, "PCA input has zero total variance");

  model.loadings = std::move(eig.vectors);
  model.eigenvalues = std::move(eig.values);
  model.explained_ratio.resize(d);
  for (std::size_t i = 0; i < d; ++i) model.explained_ratio[i] = model.eigenvalues[i] / total;
  model.kept = d;
  return model;
}

std::size_t choose_components(const PcaModel& model, double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw Error(ErrorKind::kInvalidParams, "threshold must be in (0, 1]");
  }
  double cumulative = 0.0;
  for (std::size_t i = 0; i < model.explained_ratio.size(); ++i) {
    cumulative += model.explained_ratio[i];
    if (cumulative >= threshold - 1e-12) return i + 1;
  }
  return model.explained_ratio.size();
}

Matrix transform(const PcaModel& model, const Matrix& x) {
  const auto d = model.dim();
  if (x.cols() != d) {
    throw Error(ErrorKind::kDimensionMismatch,
                "transform expects " + std::to_string(d) + " columns, got " + std::to_string(x.cols()));
  }
  const auto k = model.kept;
  Matrix out(x.rows(), k);
  std::vector<double> centered(d);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto row = x.row(r);
    for (std::size_t j = 0; j < d; ++j) {
      centered[j] = row[j] - model.mean[j];
      if (!model.scale.empty()) centered[j] /= model.scale[j];
    }
    auto dst = out.row(r);
    for (std::size_t j = 0; j < d; ++j) {
      const double c = centered[j];
      if (c == 0.0) continue;
      const auto w = model.loadings.row(j);
      for (std::size_t i = 0; i < k; ++i) dst[i] += c * w[i];
    }
  }
  return out;
}

Matrix reconstruct(const PcaModel& model, const Matrix& scores) {
  const auto d = model.dim();
  const auto k = model.kept;
  if (scores.cols() != k) throw Error(ErrorKind::kDimensionMismatch, "reconstruct: score width != kept");
  Matrix out(scores.rows(), d);
  for (std::size_t r = 0; r < scores.rows(); ++r) {
    for (std::size_t j = 0; j < d; ++j) {
      double v = 0.0;
      for (std::size_t i = 0; i < k; ++i) v += model.loadings(j, i) * scores(r, i);
      if (!model.scale.empty()) v *= model.scale[j];
      out(r, j) = v + model.mean[j];
    }
  }
  return out;
}

void save_pca(const PcaModel& model, std::ostream& out) {
  const auto d = model.dim();
  out << kPcaMagic << ' ' << kPcaVersion << '\n';
  out << "dim " << d << '\n' << "kept " << model.kept << '\n';
  out << "mean " << d << '\n';
  write_doubles(out, model.mean);
  out << "scale " << model.scale.size() << '\n';
  write_doubles(out, model.scale);
  out << "eigenvalues " << d << '\n';
  write_doubles(out, model.eigenvalues);
  out << "loadings " << d << '\n';
  for (std::size_t r = 0; r < d; ++r) write_doubles(out, model.loadings.row(r));
}

PcaModel load_pca(std::istream& in) {
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != kPcaMagic) throw Error(ErrorKind::kParse, "not a pca model");
  if (version != kPcaVersion) {
    throw Error(ErrorKind::kParse, "unsupported pca model version " + std::to_string(version));
  }
  PcaModel model;
  std::size_t d = 0, n = 0;
  expect_header(in, "dim", d);
  expect_header(in, "kept", model.kept);
  if (model.kept > d) throw Error(ErrorKind::kParse, "pca model: kept > dim");
  expect_header(in, "mean", n);
  if (n != d) throw Error(ErrorKind::kParse, "pca model: mean length");
  model.mean = read_doubles(in, d);
  expect_header(in, "scale", n);
  if (n != 0 && n != d) throw Error(ErrorKind::kParse, "pca model: scale length");
  model.scale = read_doubles(in, n);
  expect_header(in, "eigenvalues", n);
  if (n != d) throw Error(ErrorKind::kParse, "pca model: eigenvalue count");
  model.eigenvalues = read_doubles(in, d);
  expect_header(in, "loadings", n);
  if (n != d) throw Error(ErrorKind::kParse, "pca model: loadings shape");
  const auto flat = read_doubles(in, d * d);
  model.loadings = Matrix(d, d);
  std::copy(flat.begin(), flat.end(), model.loadings.data().begin());
  const double total = std::accumulate(model.eigenvalues.begin(), model.eigenvalues.end(), 0.0);
  model.explained_ratio.resize(d);
  for (std::size_t i = 0; i < d; ++i) model.explained_ratio[i] = total > 0 ? model.eigenvalues[i] / total : 0.0;
  return model;
}

void save_pca(const PcaModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  save_pca(model, out);
}

PcaModel load_pca(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot read " + path.string());
  return load_pca(in);
}

}  // namespace earncast
