#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

namespace earncast {

/// A calendar quarter, stored as one ordinal.
class CalendarQuarter {
 public:
  CalendarQuarter() = default;
  /// Throws Error(kMalformedQuarter) when quarter is outside 1..=4.
  CalendarQuarter(int year, int quarter);

  static CalendarQuarter from_ordinal(std::int64_t ordinal);
  /// "2008Q1". Throws Error(kMalformedQuarter).
  static CalendarQuarter parse(std::string_view text);

  int year() const noexcept;
  int quarter() const noexcept;
  std::int64_t ordinal() const noexcept { return ordinal_; }

  CalendarQuarter succ() const noexcept { return from_ordinal(ordinal_ + 1); }
  CalendarQuarter operator+(std::int64_t n) const noexcept { return from_ordinal(ordinal_ + n); }
  CalendarQuarter operator-(std::int64_t n) const noexcept { return from_ordinal(ordinal_ - n); }
  /// Signed distance in quarters.
  std::int64_t operator-(const CalendarQuarter& other) const noexcept {
    return ordinal_ - other.ordinal_;
  }

  auto operator<=>(const CalendarQuarter&) const = default;

  /// "2008Q1"
  std::string to_string() const;

 private:
  std::int64_t ordinal_ = 0;  // year * 4 + (quarter - 1)
};

using CompanyId = std::string;

struct PanelKey {
  CompanyId company;
  CalendarQuarter quarter;

  auto operator<=>(const PanelKey&) const = default;
};

struct PanelKeyHash {
  std::size_t operator()(const PanelKey& k) const noexcept {
    return std::hash<std::string>{}(k.company) * 31u +
           std::hash<std::int64_t>{}(k.quarter.ordinal());
  }
};

}  // namespace earncast
