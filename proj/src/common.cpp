#include "earncast/error.hpp"
#include "earncast/matrix.hpp"
#include "earncast/quarter.hpp"
#include "earncast/rng.hpp"

#include <algorithm>
#include <limits>
#include <numbers>

namespace earncast {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kParse: return "parse error";
    case ErrorKind::kDuplicateName: return "duplicate name";
    case ErrorKind::kUnknownVariable: return "unknown variable";
    case ErrorKind::kMalformedQuarter: return "malformed quarter";
    case ErrorKind::kMissingDenominator: return "missing denominator variable";
    case ErrorKind::kInsufficientData: return "insufficient data";
    case ErrorKind::kDegenerateInput: return "degenerate input";
    case ErrorKind::kDimensionMismatch: return "dimension mismatch";
    case ErrorKind::kInvalidParams: return "invalid parameters";
    case ErrorKind::kWindowTooSmall: return "window too small";
    case ErrorKind::kInsufficientHistory: return "insufficient history";
    case ErrorKind::kInvalidSpec: return "invalid spec";
    case ErrorKind::kInvalidConfig: return "invalid config";
    case ErrorKind::kIo: return "i/o error";
    case ErrorKind::kMissingRecords: return "missing records";
    case ErrorKind::kAllTrialsFailed: return "all trials failed";
  }
  return "error";
}

// ---------------------------------------------------------------------------
// CalendarQuarter

CalendarQuarter::CalendarQuarter(int year, int quarter) {
  if (quarter < 1 || quarter > 4) {
    throw Error(ErrorKind::kMalformedQuarter,
                "quarter " + std::to_string(quarter) + " outside 1..4 (year " +
                    std::to_string(year) + ")");
  }
  ordinal_ = static_cast<std::int64_t>(year) * 4 + (quarter - 1);
}

CalendarQuarter CalendarQuarter::from_ordinal(std::int64_t ordinal) {
  CalendarQuarter q;
  q.ordinal_ = ordinal;
  return q;
}

int CalendarQuarter::year() const noexcept {
  // floor division so negative ordinals stay consistent
  std::int64_t y = ordinal_ >= 0 ? ordinal_ / 4 : -((-ordinal_ + 3) / 4);
  return static_cast<int>(y);
}

int CalendarQuarter::quarter() const noexcept {
  return static_cast<int>(ordinal_ - static_cast<std::int64_t>(year()) * 4) + 1;
}

std::string CalendarQuarter::to_string() const {
  return std::to_string(year()) + "Q" + std::to_string(quarter());
}

CalendarQuarter CalendarQuarter::parse(std::string_view text) {
  const auto q = text.find_first_of("Qq");
  auto bad = [&] { return Error(ErrorKind::kMalformedQuarter, "cannot parse quarter '" + std::string(text) + "'"); };
  if (q == std::string_view::npos || q == 0 || q + 2 != text.size()) throw bad();
  int year = 0;
  for (std::size_t i = 0; i < q; ++i) {
    if (text[i] < '0' || text[i] > '9') throw bad();
    year = year * 10 + (text[i] - '0');
    if (year > 100000) throw bad();
  }
  const char d = text[q + 1];
  if (d < '1' || d > '4') throw bad();
  return CalendarQuarter(year, d - '0');
}

// ---------------------------------------------------------------------------
// Rng

std::uint64_t Rng::mix(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  auto splitmix = [](std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  };
  return splitmix(splitmix(splitmix(seed) ^ a) ^ (b * 0xd1b54a32d192ed03ULL));
}

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
  if (hi <= lo) return lo;
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  if (span == 0) return static_cast<std::int64_t>(engine_());
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % span;
  std::uint64_t draw;
  do {
    draw = engine_();
  } while (draw >= limit);
  return lo + static_cast<std::int64_t>(draw % span);
}

double Rng::normal() {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::vector<std::size_t> Rng::sample_without_replacement(std::size_t n, std::size_t k) {
  if (k >= n) {
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    return all;
  }
  // partial Fisher-Yates
  std::vector<std::size_t> pool(n);
  for (std::size_t i = 0; i < n; ++i) pool[i] = i;
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = static_cast<std::size_t>(
        uniform_int(static_cast<std::int64_t>(i), static_cast<std::int64_t>(n) - 1));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

// ---------------------------------------------------------------------------
// Matrix

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

std::vector<double> Matrix::column(std::size_t c) const {
  std::vector<double> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

Matrix Matrix::select_rows(std::span<const std::size_t> rows) const {
  Matrix out(rows.size(), cols_);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto src = row(rows[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

Matrix Matrix::select_cols(std::span<const std::size_t> cols) const {
  Matrix out(rows_, cols.size());
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t j = 0; j < cols.size(); ++j) out(r, j) = (*this)(r, cols[j]);
  return out;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "matmul " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " by " +
                    std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto dst = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      auto src = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) dst[j] += aik * src[j];
    }
  }
  return out;
}

}  // namespace earncast
