#include <gtest/gtest.h>

#include <cmath>

#include "advpara/eval/quality.hpp"
#include "advpara/eval/roc.hpp"
#include "advpara/eval/stats.hpp"
#include "advpara/eval/transfer.hpp"
#include "advpara/util/error.hpp"
#include "advpara/util/rng.hpp"
#include "fixtures.hpp"

namespace advpara::eval {
namespace {

ScoredDataset make(std::vector<double> pos, std::vector<double> neg, std::string det = "d") {
  return {std::move(pos), std::move(neg), std::move(det), "a", "x"};
}

// Pairwise-count AUC: P(pos > neg) + 0.5 P(pos = neg).
double mann_whitney(const ScoredDataset& d) {
  double wins = 0.0;
  for (double p : d.positive_scores) {
    for (double n : d.negative_scores) wins += p > n ? 1.0 : p == n ? 0.5 : 0.0;
  }
  return wins / (static_cast<double>(d.positive_scores.size()) * d.negative_scores.size());
}

TEST(Roc, PerfectSeparationPassesThroughCorner) {
  const auto curve = roc_curve(make({0.9, 0.8}, {0.2, 0.1}));
  bool corner = false;
  for (const auto& p : curve) corner = corner || (p.fpr == 0.0 && p.tpr == 1.0);
  EXPECT_TRUE(corner);
  EXPECT_EQ(auc(make({0.9, 0.8}, {0.2, 0.1})), 1.0);
}

TEST(Roc, SingleThresholdForIdenticalScores) {
  const auto curve = roc_curve(make({0.4, 0.4}, {0.4, 0.4, 0.4}));
  ASSERT_EQ(curve.size(), 2u);
  EXPECT_TRUE(std::isinf(curve[0].threshold));
  EXPECT_EQ(curve[1].fpr, 1.0);
  EXPECT_EQ(curve[1].tpr, 1.0);
  EXPECT_EQ(auc(make({0.4, 0.4}, {0.4, 0.4, 0.4})), 0.5);
}

TEST(Roc, HandSweep) {
  const auto d = make({0.9, 0.8, 0.35}, {0.7, 0.3, 0.1});
  const auto curve = roc_curve(d);
  const std::vector<std::array<double, 3>> expected{
      {0.0, 0.0, INFINITY},         {0.0, 1.0 / 3, 0.9}, {0.0, 2.0 / 3, 0.8}, {1.0 / 3, 2.0 / 3, 0.7},
      {1.0 / 3, 1.0, 0.35},         {2.0 / 3, 1.0, 0.3}, {1.0, 1.0, 0.1},
  };
  ASSERT_EQ(curve.size(), expected.size());
  for (std::size_t i = 0; i < curve.size(); ++i) {
    EXPECT_NEAR(curve[i].fpr, expected[i][0], 1e-15);
    EXPECT_NEAR(curve[i].tpr, expected[i][1], 1e-15);
    EXPECT_EQ(curve[i].threshold, expected[i][2]);
  }
  EXPECT_NEAR(auc(d), 8.0 / 9.0, 1e-12);
  EXPECT_NEAR(tpr_at_fpr(d, 0.01), 2.0 / 3, 1e-15);
  EXPECT_NEAR(tpr_at_fpr(d, 0.34), 1.0, 1e-15);
}

TEST(Roc, TrapezoidEqualsMannWhitney) {
  Rng rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> pos(200), neg(200);
    // Coarse grid so that ties across and within classes occur.
    const double grid = trial % 2 == 0 ? 20.0 : 1e6;
    for (auto& x : pos) x = std::floor((rng.uniform01() * 0.8 + 0.2) * grid) / grid;
    for (auto& x : neg) x = std::floor(rng.uniform01() * grid) / grid;
    const auto d = make(pos, neg);
    ASSERT_NEAR(auc(d), mann_whitney(d), 1e-9) << "trial " << trial;
  }
}

TEST(Roc, ExchangeableTprAtOnePercent) {
  Rng rng(23);
  double total = 0.0;
  const int runs = 20;
  for (int run = 0; run < runs; ++run) {
    std::vector<double> pos(10000), neg(10000);
    for (auto& x : pos) x = rng.uniform01();
    for (auto& x : neg) x = rng.uniform01();
    const double t = tpr_at_fpr(make(pos, neg), 0.01);
    EXPECT_GE(t, 0.0);
    EXPECT_LE(t, 0.03);
    total += t;
  }
  EXPECT_NEAR(total / runs, 0.01, 0.005);
}

TEST(Roc, ShuffledLabelsGiveChance) {
  Rng rng(29);
  std::vector<double> scores(400);
  for (auto& x : scores) x = rng.uniform01();
  std::vector<double> pos, neg;
  for (double s : scores) (rng.uniform01() < 0.5 ? pos : neg).push_back(s);
  EXPECT_NEAR(auc(make(pos, neg)), 0.5, 0.05);
}

TEST(Roc, PerfectDetectorAtAnyTarget) {
  const auto d = make({1, 1, 1}, {0, 0, 0, 0});
  for (double target : {0.0, 0.01, 0.5}) EXPECT_EQ(tpr_at_fpr(d, target), 1.0);
}

TEST(Roc, Validation) {
  EXPECT_THROW(roc_curve(make({}, {0.1})), DataError);
  EXPECT_THROW(roc_curve(make({NAN}, {0.1})), DataError);
  const auto csv = roc_to_csv(roc_curve(make({0.9}, {0.1})));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "fpr,tpr,threshold");
}

TEST(Transfer, IdenticalRunHasNoDrop) {
  const auto base = make({0.9, 0.8, 0.7}, {0.1, 0.2, 0.3});
  const auto m = transfer_matrix({{{"g", "d"}, base}}, {{"d", base}});
  ASSERT_TRUE(m.find("g", "d"));
  EXPECT_EQ(*m.find("g", "d")->relative_drop, 0.0);
}

TEST(Transfer, TotalEvasion) {
  const auto base = make({0.9, 0.8, 0.7}, {0.1, 0.2, 0.3});
  const auto attacked = make({0.01, 0.02, 0.05}, {0.1, 0.2, 0.3});
  const auto m = transfer_matrix({{{"g", "d"}, attacked}}, {{"d", base}});
  EXPECT_EQ(m.find("g", "d")->attacked_tpr, 0.0);
  EXPECT_EQ(*m.find("g", "d")->relative_drop, 1.0);
}

TEST(Transfer, HandTwoByTwo) {
  const std::vector<double> neg{0.1, 0.2, 0.3, 0.4};
  const std::map<std::string, ScoredDataset> baselines{{"d1", make({0.9, 0.8, 0.7, 0.6}, neg, "d1")},
                                                       {"d2", make({0.9, 0.8, 0.7, 0.35}, neg, "d2")}};
  // Baseline T@1%F: d1 4/4, d2 3/4 (0.35 sits below the top negative).
  const std::map<RunKey, ScoredDataset> runs{
      {{"g1", "d1"}, make({0.9, 0.8, 0.2, 0.1}, neg, "d1")},
      {{"g1", "d2"}, make({0.9, 0.3, 0.2, 0.1}, neg, "d2")},
      {{"g2", "d1"}, make({0.9, 0.8, 0.7, 0.1}, neg, "d1")},
      {{"g2", "d2"}, make({0.2, 0.3, 0.2, 0.1}, neg, "d2")},
  };
  const auto m = transfer_matrix(runs, baselines);
  EXPECT_EQ(m.rows, (std::vector<std::string>{"g1", "g2"}));
  EXPECT_EQ(m.columns, (std::vector<std::string>{"d1", "d2"}));
  EXPECT_NEAR(*m.find("g1", "d1")->relative_drop, 0.5, 1e-12);
  EXPECT_NEAR(*m.find("g1", "d2")->relative_drop, (0.75 - 0.25) / 0.75, 1e-12);
  EXPECT_NEAR(*m.find("g2", "d1")->relative_drop, 0.25, 1e-12);
  EXPECT_NEAR(*m.find("g2", "d2")->relative_drop, 1.0, 1e-12);
}

TEST(Transfer, SimpleRowFirstAndZeroBaseline) {
  const std::vector<double> neg{0.5, 0.6};
  const std::map<std::string, ScoredDataset> baselines{{"d", make({0.1, 0.2}, neg)}};
  const std::map<RunKey, ScoredDataset> runs{{{"a", "d"}, make({0.1, 0.2}, neg)},
                                            {{kSimpleParaphraseRow, "d"}, make({0.1, 0.2}, neg)}};
  const auto m = transfer_matrix(runs, baselines);
  EXPECT_EQ(m.rows.front(), kSimpleParaphraseRow);
  EXPECT_FALSE(m.find("a", "d")->relative_drop);
  EXPECT_NE(m.to_csv().find("guidance,deployed"), std::string::npos);
}

TEST(Stats, PairedTTestAgainstClosedForm) {
  // Differences 1, 2, 3: mean 2, sd 1, t = 2 sqrt(3); df = 2 has
  // CDF(t) = 1/2 + t / (2 sqrt(2 + t^2)).
  const std::vector<double> a{2, 4, 6};
  const std::vector<double> b{1, 2, 3};
  const auto r = paired_t_test_less(a, b);
  const double t = 2.0 * std::sqrt(3.0);
  EXPECT_NEAR(r.mean_difference, 2.0, 1e-12);
  EXPECT_NEAR(r.t, t, 1e-12);
  EXPECT_NEAR(r.p_value, 0.5 + t / (2.0 * std::sqrt(2.0 + t * t)), 1e-9);
  const auto flipped = paired_t_test_less(b, a);
  EXPECT_NEAR(flipped.p_value, 1.0 - r.p_value, 1e-9);
  EXPECT_NEAR(stddev(std::vector<double>{1, 2, 3}), 1.0, 1e-12);
}

class QualityTest : public ::testing::Test {
 protected:
  const synth::Lab& lab = advpara::testing::small_lab();
  HeuristicJudge judge{*lab.vocab, lab.lm};
};

TEST_F(QualityTest, VerbatimAndDisjoint) {
  const std::string text = lab.eval_ai.front().text;
  EXPECT_EQ(judge.rate(text, text), 5);
  EXPECT_EQ(judge.rate("alpha beta gamma", "delta epsilon zeta"), 1);
}

TEST_F(QualityTest, RatingThresholds) {
  EXPECT_EQ(HeuristicJudge::rating_from(0.5, 1.1), 4);
  EXPECT_EQ(HeuristicJudge::rating_from(0.5, 2.5), 3);
  EXPECT_EQ(HeuristicJudge::rating_from(0.6, 1.0), 5);
  EXPECT_EQ(HeuristicJudge::rating_from(0.3, 1.0), 3);
  EXPECT_EQ(HeuristicJudge::rating_from(0.15, 1.0), 2);
  EXPECT_EQ(HeuristicJudge::rating_from(0.1, 5.0), 1);
}

TEST_F(QualityTest, ContentOverlapIsJaccardOverContentWords) {
  // Stopwords drop out; {cat, sat, mat} vs {cat, mat, dog} share 2 of 4.
  EXPECT_NEAR(judge.content_overlap("the cat sat on the mat", "a cat and a mat and a dog"), 0.5, 1e-12);
}

TEST_F(QualityTest, ReportAggregatesAndFlagsFailures) {
  class Flaky final : public Judge {
   public:
    std::string id() const override { return "flaky"; }
    int rate(std::string_view, std::string_view p) const override {
      if (p == "bad") throw std::runtime_error("no verdict");
      return static_cast<int>(p.size());
    }
    Verdict compare(std::string_view, std::string_view a, std::string_view b) const override {
      return a.size() > b.size() ? Verdict::win : a.size() == b.size() ? Verdict::tie : Verdict::loss;
    }
  };
  const std::vector<QualityItem> items{
      {"1", "o", "abc", std::string("ab")}, {"2", "o", "bad", std::nullopt}, {"3", "o", "a", std::string("a")}};
  const auto r = quality_report(items, Flaky{});
  EXPECT_EQ(r.failures, 1u);
  EXPECT_NEAR(r.mean_rating, 2.0, 1e-12);
  EXPECT_EQ(r.wins, 1u);
  EXPECT_EQ(r.ties, 1u);
  EXPECT_EQ(r.losses, 0u);
  EXPECT_FALSE(r.records[1].error.empty());
  EXPECT_EQ(parse_verdict("loss"), Verdict::loss);
  EXPECT_THROW(parse_verdict("draw"), DataError);
}

}  // namespace
}  // namespace advpara::eval
