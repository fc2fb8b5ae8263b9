#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "earncast/features.hpp"
#include "earncast/panel.hpp"

namespace earncast {

struct ConsensusRow {
  Cell consensus_mean;
  Cell consensus_median;
  Cell actual_nongaap;
  bool operator==(const ConsensusRow&) const = default;
};

/// Analyst estimates and non-GAAP actuals, in net-income units.
using ConsensusTable = std::map<PanelKey, ConsensusRow>;

/// company_id,year,quarter,consensus_mean,consensus_median,actual_nongaap
ConsensusTable load_consensus(const std::filesystem::path& path);
ConsensusTable parse_consensus(std::istream& in);
void write_consensus(const ConsensusTable& table, std::ostream& out);

enum class ConsensusStatistic { kMean, kMedian };

struct ConsensusClasses {
  std::vector<std::optional<int>> consensus;
  /// Non-GAAP actuals cut the same way.
  std::vector<std::optional<int>> actual;
  /// Keys lacking a consensus or an actual target.
  std::size_t skipped = 0;
};

/// Relative-change targets over assets at T, quantile-cut within each
/// quarter exactly like build_labels. QoQ consensus target is
/// (C[T+1] - N[T]) / A[T], the actual is (N[T+1] - N[T]) / A[T]; YoY sums the
/// next four estimates against the trailing four actuals.
ConsensusClasses consensus_classes(const ConsensusTable& table, const RawPanel& panel, const LabelSpec& spec,
                                   std::span<const PanelKey> keys,
                                   ConsensusStatistic statistic = ConsensusStatistic::kMean);

}  // namespace earncast
