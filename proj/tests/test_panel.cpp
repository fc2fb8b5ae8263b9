#include <gtest/gtest.h>

#include <sstream>

#include "earncast/error.hpp"
#include "earncast/panel.hpp"
#include "support/helpers.hpp"

using namespace earncast;

namespace {

const char* kHeader = "name,statement_group,yoy,qoq,pct_assets,pct_revenue,crucial,next_quarter_aligned\n";

Schema schema_of(const std::string& rows) {
  std::istringstream in(std::string(kHeader) + rows);
  return parse_schema(in);
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::kIo;
}

RawPanel small_panel(CompanyMetaTable meta = {}) {
  std::vector<PanelKey> keys;
  std::vector<Cell> rate, niq;
  for (const char* c : {"A", "B", "C"}) {
    for (int q = 1; q <= 3; ++q) {
      keys.push_back({c, CalendarQuarter(2010, q)});
      rate.push_back(static_cast<double>(q));
      niq.push_back(10.0 * q);
    }
  }
  return RawPanel({"rate", "niq"}, keys, {rate, niq}, std::move(meta));
}

}  // namespace

TEST(Schema, RevenueRowGetsGrowthFormatsAndRaw) {
  const auto s = schema_of("revtq,income,1,1,0,0,1,0\n");
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].formats, (FormatSet{Format::kYoY, Format::kQoQ, Format::kRaw}));
  EXPECT_TRUE(s[0].crucial);
  EXPECT_EQ(s[0].group, StatementGroup::kIncome);
}

TEST(Schema, EmptyBodyIsEmptyList) { EXPECT_TRUE(schema_of("").empty()); }

TEST(Schema, DuplicateNameRejected) {
  EXPECT_EQ(kind_of([] { schema_of("niq,income,1,1,0,0,1,0\nniq,income,1,0,0,0,0,0\n"); }),
            ErrorKind::kDuplicateName);
}

TEST(Schema, ParseErrorNamesRow) {
  try {
    schema_of("niq,income,1,1,0,0,1,0\nbad,income,1\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kParse);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

TEST(Schema, WriteThenParseRoundTrips) {
  const auto s = schema_of("niq,income,1,1,1,1,1,0\natq,balance,1,0,0,0,1,0\nvix,market,0,1,0,0,0,1\n");
  std::stringstream ss;
  write_schema(s, ss);
  EXPECT_EQ(parse_schema(ss), s);
}

TEST(Panel, LoadsKeysAndKeepsMissingDistinctFromZero) {
  const auto schema = schema_of("niq,income,1,1,0,0,1,0\n");
  std::istringstream in(
      "company_id,year,quarter,variable,value\n"
      "A,2010,1,niq,\n"
      "A,2010,2,niq,0\n");
  const auto panel = parse_panel(in, schema);
  ASSERT_EQ(panel.rows(), 2u);
  EXPECT_FALSE(panel.column("niq")[0].has_value());
  ASSERT_TRUE(panel.column("niq")[1].has_value());
  EXPECT_EQ(*panel.column("niq")[1], 0.0);
}

TEST(Panel, UnknownVariableAndBadQuarterRejected) {
  const auto schema = schema_of("niq,income,1,1,0,0,1,0\n");
  EXPECT_EQ(kind_of([&] {
              std::istringstream in("company_id,year,quarter,variable,value\nA,2010,1,xyzzy,1\n");
              parse_panel(in, schema);
            }),
            ErrorKind::kUnknownVariable);
  EXPECT_EQ(kind_of([&] {
              std::istringstream in("company_id,year,quarter,variable,value\nA,2010,5,niq,1\n");
              parse_panel(in, schema);
            }),
            ErrorKind::kMalformedQuarter);
}

TEST(Panel, DuplicateKeysRejected) {
  std::vector<PanelKey> keys{{"A", CalendarQuarter(2000, 1)}, {"A", CalendarQuarter(2000, 1)}};
  EXPECT_THROW(RawPanel({"x"}, keys, {{1.0, 2.0}}), Error);
}

TEST(Panel, RaggedColumnRejected) {
  std::vector<PanelKey> keys{{"A", CalendarQuarter(2000, 1)}};
  EXPECT_EQ(kind_of([&] { RawPanel({"x"}, keys, {{1.0, 2.0}}); }), ErrorKind::kDimensionMismatch);
}

TEST(Panel, KeysAreSortedOnConstruction) {
  std::vector<PanelKey> keys{{"B", CalendarQuarter(2000, 1)}, {"A", CalendarQuarter(2000, 2)},
                             {"A", CalendarQuarter(2000, 1)}};
  const RawPanel p({"x"}, keys, {{3.0, 2.0, 1.0}});
  EXPECT_EQ(p.keys()[0], (PanelKey{"A", CalendarQuarter(2000, 1)}));
  EXPECT_EQ(*p.column("x")[0], 1.0);
  EXPECT_EQ(*p.column("x")[2], 3.0);
}

TEST(Panel, CsvRoundTripIsIdentical) {
  const auto schema = schema_of("rate,macro,0,1,0,0,0,1\nniq,income,1,1,0,0,1,0\n");
  auto panel = small_panel();
  panel = panel.with_column(0, {1.5, std::nullopt, 0.1, -2.0, 1e-300, 3.0, 7.0, 8.0, std::nullopt});
  std::stringstream ss;
  write_panel(panel, ss);
  EXPECT_EQ(parse_panel(ss, schema), panel);
}

TEST(CompanyMeta, RoundTrip) {
  CompanyMetaTable meta{{"A", {55, 0.5, true, false}}, {"B", {std::nullopt, std::nullopt, std::nullopt, true}}};
  std::stringstream ss;
  write_company_meta(meta, ss);
  EXPECT_EQ(parse_company_meta(ss), meta);
}

TEST(Filters, UtilitySectorRemoved) {
  const auto out = apply_sample_filters(small_panel({{"B", {55, 5.0, true, false}}}), FilterRules{});
  EXPECT_EQ(out.companies(), (std::vector<CompanyId>{"A", "C"}));
}

TEST(Filters, PennyStockRemoved) {
  const auto out = apply_sample_filters(small_panel({{"A", {10, 0.5, true, false}}}), FilterRules{});
  EXPECT_EQ(out.companies(), (std::vector<CompanyId>{"B", "C"}));
}

TEST(Filters, FiscalMisalignmentAndGapsRemoved) {
  const auto out = apply_sample_filters(
      small_panel({{"A", {10, 5.0, false, false}}, {"B", {10, 5.0, true, true}}}), FilterRules{});
  EXPECT_EQ(out.companies(), (std::vector<CompanyId>{"C"}));
}

TEST(Filters, PassingCompaniesRetainedUnchanged) {
  const auto in = small_panel({{"A", {10, 5.0, true, false}}});
  EXPECT_EQ(apply_sample_filters(in, FilterRules{}), in);
}

TEST(Filters, DisabledRulesKeepEverything) {
  FilterRules off;
  off.min_share_price.reset();
  off.excluded_sectors.clear();
  off.require_fiscal_alignment = false;
  off.drop_reporting_gaps = false;
  const auto in = small_panel({{"A", {55, 0.1, false, true}}});
  EXPECT_EQ(apply_sample_filters(in, off), in);
}

TEST(Filters, Idempotent) {
  const auto once = apply_sample_filters(small_panel({{"A", {40, 5.0, true, false}}}), FilterRules{});
  EXPECT_EQ(apply_sample_filters(once, FilterRules{}), once);
}

TEST(ShiftForward, AlignedSeriesMovesBackOneQuarter) {
  const auto schema = schema_of("rate,macro,0,1,0,0,0,1\nniq,income,1,1,0,0,1,0\n");
  const auto in = small_panel();
  const auto out = shift_forward_aligned(in, schema);
  const auto rate = out.column("rate");
  // [1, 2, 3] per company becomes [2, 3, Missing]
  for (std::size_t c = 0; c < 3; ++c) {
    EXPECT_EQ(rate[3 * c + 0], Cell(2.0));
    EXPECT_EQ(rate[3 * c + 1], Cell(3.0));
    EXPECT_EQ(rate[3 * c + 2], Cell());
  }
  EXPECT_TRUE(std::equal(out.column("niq").begin(), out.column("niq").end(), in.column("niq").begin()));
  EXPECT_TRUE(std::equal(out.keys().begin(), out.keys().end(), in.keys().begin()));
}

TEST(ShiftForward, SingleQuarterCompanyBecomesMissing) {
  const auto schema = schema_of("rate,macro,0,1,0,0,0,1\n");
  const RawPanel in({"rate"}, {{"Z", CalendarQuarter(2001, 2)}}, {{4.0}});
  EXPECT_FALSE(shift_forward_aligned(in, schema).column("rate")[0].has_value());
}

TEST(ShiftForward, MissingCountGrowsByFinalQuarterOnly) {
  const auto schema = schema_of("rate,macro,0,1,0,0,0,1\n");
  auto panel = small_panel();
  panel = panel.with_column(0, {1.0, std::nullopt, 3.0, 1.0, 2.0, 3.0, std::nullopt, 2.0, 3.0});
  const auto shifted = shift_forward_aligned(panel, schema);
  const auto out = shifted.column("rate");
  // each cell equals the raw next-quarter cell
  const std::vector<Cell> expected{std::nullopt, 3.0, std::nullopt, 2.0, 3.0, std::nullopt, 2.0, 3.0, std::nullopt};
  EXPECT_TRUE(std::equal(out.begin(), out.end(), expected.begin()));
}
