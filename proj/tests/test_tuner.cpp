#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "earncast/error.hpp"
#include "earncast/tuner.hpp"

using namespace earncast;

namespace {

/// Two companies over n consecutive quarters from 2000Q1.
std::vector<PanelKey> window(int n) {
  std::vector<PanelKey> keys;
  for (const char* c : {"A", "B"})
    for (int i = 0; i < n; ++i) keys.push_back({c, CalendarQuarter(2000, 1) + i});
  return keys;
}

std::set<CalendarQuarter> quarters_of(const std::vector<PanelKey>& keys, const std::vector<std::size_t>& idx) {
  std::set<CalendarQuarter> out;
  for (auto i : idx) out.insert(keys[i].quarter);
  return out;
}

}  // namespace

TEST(ValidationSplit, ChronologicalTailTakesLastQuarters) {
  const auto keys = window(80);
  const auto s = make_validation_split(keys, 4, ValidationMode::kChronologicalTail, 0);
  const auto q = quarters_of(keys, s.valid);
  // quarters 77..80 of the window
  EXPECT_EQ(q, (std::set<CalendarQuarter>{CalendarQuarter(2000, 1) + 76, CalendarQuarter(2000, 1) + 77,
                                          CalendarQuarter(2000, 1) + 78, CalendarQuarter(2000, 1) + 79}));
  EXPECT_EQ(s.valid.size(), 8u);
  EXPECT_EQ(s.train.size(), 152u);
}

TEST(ValidationSplit, LargestSizeLeavesOneTrainQuarter) {
  const auto keys = window(9);
  const auto s = make_validation_split(keys, 8, ValidationMode::kChronologicalTail, 0);
  EXPECT_EQ(quarters_of(keys, s.train).size(), 1u);
}

TEST(ValidationSplit, TooFewQuartersRejected) {
  const auto keys = window(8);
  try {
    make_validation_split(keys, 8, ValidationMode::kRandomQuarters, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kWindowTooSmall);
  }
  EXPECT_THROW(make_validation_split(window(40), 21, ValidationMode::kChronologicalTail, 0), Error);
  EXPECT_THROW(make_validation_split(window(40), 0, ValidationMode::kChronologicalTail, 0), Error);
}

TEST(ValidationSplit, RandomModeIsSeededAndPartitions) {
  const auto keys = window(40);
  const auto a = make_validation_split(keys, 6, ValidationMode::kRandomQuarters, 17);
  const auto b = make_validation_split(keys, 6, ValidationMode::kRandomQuarters, 17);
  EXPECT_EQ(a.valid, b.valid);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(quarters_of(keys, a.valid).size(), 6u);

  std::set<std::size_t> all(a.train.begin(), a.train.end());
  for (auto v : a.valid) EXPECT_TRUE(all.insert(v).second);
  EXPECT_EQ(all.size(), keys.size());
  const auto tq = quarters_of(keys, a.train), vq = quarters_of(keys, a.valid);
  for (const auto& q : vq) EXPECT_FALSE(tq.contains(q));

  bool differs = false;
  for (std::uint64_t seed = 0; seed < 5 && !differs; ++seed)
    differs = make_validation_split(keys, 6, ValidationMode::kRandomQuarters, seed).valid != a.valid;
  EXPECT_TRUE(differs);
}

TEST(SearchSpace, DefaultBoxSamplesStayInside) {
  const auto space = SearchSpace::default_box();
  Rng rng(3);
  for (int i = 0; i < 500; ++i) {
    const auto p = space.sample(rng, HyperParams{});
    EXPECT_TRUE(space.contains(p));
    EXPECT_GE(p.learning_rate, 0.6);
    EXPECT_LE(p.learning_rate, 1.0);
    EXPECT_GE(p.num_leaves, 50);
    EXPECT_LE(p.num_leaves, 200);
    EXPECT_GE(p.min_gain_to_split, 0.5);
    EXPECT_LE(p.min_gain_to_split, 0.72);
    EXPECT_NO_THROW(p.validate());
  }
}

TEST(SearchSpace, IntegerAndLogScales) {
  SearchSpace space;
  space.ranges = {{"num_leaves", 2, 9, Scale::kInteger}, {"lambda_l2", 0.01, 100, Scale::kLog}};
  Rng rng(4);
  std::set<int> leaves;
  int below_one = 0;
  for (int i = 0; i < 400; ++i) {
    const auto p = space.sample(rng, HyperParams{});
    leaves.insert(p.num_leaves);
    EXPECT_GE(p.lambda_l2, 0.01);
    EXPECT_LE(p.lambda_l2, 100);
    below_one += p.lambda_l2 < 1.0;
  }
  EXPECT_EQ(leaves.size(), 8u);
  EXPECT_GT(below_one, 120);  // log-uniform puts about half below 1
}

TEST(SearchSpace, InvalidRangesRejected) {
  SearchSpace s;
  s.ranges = {{"learning_rate", 1.0, 0.5, Scale::kLinear}};
  EXPECT_THROW(s.validate(), Error);
  s.ranges = {{"no_such_param", 0, 1, Scale::kLinear}};
  EXPECT_THROW(s.validate(), Error);
  s.ranges = {{"lambda_l1", 0, 1, Scale::kLog}};
  EXPECT_THROW(s.validate(), Error);
}

TEST(SearchSpace, GetAndSetByName) {
  HyperParams p;
  set_param(p, "bagging_freq", 4);
  set_param(p, "feature_fraction", 0.35);
  EXPECT_EQ(p.bagging_freq, 4);
  EXPECT_EQ(get_param(p, "feature_fraction"), 0.35);
  EXPECT_TRUE(is_tunable_param("max_bin"));
  EXPECT_FALSE(is_tunable_param("seed"));
}

TEST(Search, BudgetOneReturnsThatTrial) {
  SearchOptions opt;
  opt.budget = 1;
  const auto r = search(SearchSpace::default_box(), [](const HyperParams&) { return TrialOutcome{0.2, 0.3, 7}; }, opt);
  EXPECT_EQ(r.best_trial, 0);
  ASSERT_EQ(r.trials.size(), 1u);
  EXPECT_EQ(r.best, r.trials[0].params);
}

TEST(Search, TiesGoToEarliestTrial) {
  SearchOptions opt;
  opt.budget = 6;
  const auto r = search(SearchSpace::default_box(), [](const HyperParams&) { return TrialOutcome{0.5, 0.5, 1}; }, opt);
  EXPECT_EQ(r.best_trial, 0);
}

TEST(Search, BestIsExactMaximumOverTrials) {
  SearchOptions opt;
  opt.budget = 30;
  opt.seed = 5;
  const auto r = search(
      SearchSpace::default_box(), [](const HyperParams& p) { return TrialOutcome{p.feature_fraction * 0.9, 0.0, 1}; },
      opt);
  double best = -1;
  for (const auto& t : r.trials) best = std::max(best, *t.validation_metric);
  EXPECT_EQ(*r.trials[static_cast<std::size_t>(r.best_trial)].validation_metric, best);
}

TEST(Search, UnimodalObjectiveFindsOptimum) {
  for (auto mode : {SearchMode::kRandom, SearchMode::kAdaptive}) {
    SearchOptions opt;
    opt.budget = 50;
    opt.seed = 8;
    opt.mode = mode;
    const double optimum = 0.8;
    const auto r = search(
        SearchSpace::default_box(),
        [&](const HyperParams& p) {
          const double d = p.learning_rate - optimum;
          return TrialOutcome{1.0 - d * d, 0.0, 1};
        },
        opt);
    EXPECT_NEAR(r.best.learning_rate, optimum, 0.1 * optimum);
  }
}

TEST(Search, FailedTrialsAreRecordedNotFatal) {
  SearchOptions opt;
  opt.budget = 4;
  int calls = 0;
  const auto r = search(
      SearchSpace::default_box(),
      [&](const HyperParams&) -> TrialOutcome {
        if (calls++ % 2 == 0) throw Error(ErrorKind::kInsufficientData, "boom");
        return {0.4, 0.4, 1};
      },
      opt);
  EXPECT_EQ(r.best_trial, 1);
  EXPECT_FALSE(r.trials[0].error.empty());
  EXPECT_FALSE(r.trials[0].validation_metric.has_value());
}

TEST(Search, AllFailedIsAnError) {
  SearchOptions opt;
  opt.budget = 3;
  try {
    search(SearchSpace::default_box(),
           [](const HyperParams&) -> TrialOutcome { throw Error(ErrorKind::kInsufficientData, "no"); }, opt);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kAllTrialsFailed);
  }
}

TEST(Search, ReproducibleUnderSeed) {
  SearchOptions opt;
  opt.budget = 10;
  opt.seed = 99;
  opt.mode = SearchMode::kAdaptive;
  auto obj = [](const HyperParams& p) { return TrialOutcome{p.lambda_l1 / 20.0, 0.0, 1}; };
  const auto a = search(SearchSpace::default_box(), obj, opt);
  const auto b = search(SearchSpace::default_box(), obj, opt);
  ASSERT_EQ(a.trials.size(), b.trials.size());
  for (std::size_t i = 0; i < a.trials.size(); ++i) EXPECT_EQ(a.trials[i].params, b.trials[i].params);
}

TEST(Search, AdaptivePhaseStaysInsideOriginalBox) {
  SearchOptions opt;
  opt.budget = 20;
  opt.mode = SearchMode::kAdaptive;
  const auto space = SearchSpace::default_box();
  const auto r = search(space, [](const HyperParams& p) { return TrialOutcome{p.bagging_fraction, 0.0, 1}; }, opt);
  for (const auto& t : r.trials) EXPECT_TRUE(space.contains(t.params));
}

TEST(Search, TrialLedgerIsOneRecordPerLine) {
  SearchOptions opt;
  opt.budget = 3;
  const auto r = search(SearchSpace::default_box(), [](const HyperParams&) { return TrialOutcome{0.3, 0.4, 2}; }, opt);
  std::stringstream ss;
  write_trials(r.trials, ss);
  std::string line;
  int n = 0;
  while (std::getline(ss, line)) {
    ++n;
    EXPECT_EQ(line.front(), '{');
  }
  EXPECT_EQ(n, 3);
}
