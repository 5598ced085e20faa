#include <gtest/gtest.h>

#include <cmath>

#include "advpara/detectors/detector_io.hpp"
#include "advpara/detectors/features.hpp"
#include "advpara/detectors/logistic.hpp"
#include "advpara/detectors/watermark_detector.hpp"
#include "advpara/detectors/zero_shot.hpp"
#include "advpara/eval/stats.hpp"
#include "advpara/sampling/sampling.hpp"
#include "advpara/util/error.hpp"
#include "fixtures.hpp"

namespace advpara::detectors {
namespace {

using advpara::testing::small_detectors;
using advpara::testing::small_lab;

std::vector<std::string> words(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("w" + std::to_string(i));
  return out;
}

// Unigram model over {eos, unk, a..h}: counts a 4, b 3, c 2, d 1, eos 1; add-1.
std::shared_ptr<NGramLM> ten_token_lm() {
  const Vocabulary v({"a", "b", "c", "d", "e", "f", "g", "h"});
  const std::vector<TokenSequence> corpus{encode(v, "a a a a b b b c c d")};
  return std::make_shared<NGramLM>(train_lm(corpus, v, 1, 1.0));
}

TEST(Features, SingleArgmaxToken) {
  const auto lm = ten_token_lm();
  const auto f = extract_features(*lm, TokenSequence{2});
  EXPECT_EQ(f[kFracTop10], 1.0);
  EXPECT_EQ(f[kMeanLogRank], 0.0);
  EXPECT_EQ(f[kLogLength], 0.0);
  EXPECT_EQ(f[kTypeTokenRatio], 1.0);
}

TEST(Features, HandRankedTable) {
  const auto lm = ten_token_lm();
  // Probabilities over 21: a 5, b 4, c 3, eos 2, d 2, unk/e/f/g/h 1.
  // Text c a h d a: ranks 2 0 9 4 0.
  const TokenSequence text{4, 2, 9, 5, 2};
  const std::vector<double> lp{std::log(3.0 / 21), std::log(5.0 / 21), std::log(1.0 / 21), std::log(2.0 / 21),
                               std::log(5.0 / 21)};
  const std::vector<double> ranks{2, 0, 9, 4, 0};
  double mean = 0.0;
  for (double x : lp) mean += x / 5.0;
  double var = 0.0;
  for (double x : lp) var += (x - mean) * (x - mean) / 5.0;
  double log_rank = 0.0;
  for (double r : ranks) log_rank += std::log(1.0 + r) / 5.0;

  const auto obs = observe_text(*lm, text);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(obs[i].rank, static_cast<std::size_t>(ranks[i]));
  const auto f = extract_features(*lm, text);
  EXPECT_NEAR(f[kMeanLogProb], mean, 1e-12);
  EXPECT_NEAR(f[kStdLogProb], std::sqrt(var), 1e-12);
  EXPECT_EQ(f[kFracTop10], 1.0);
  EXPECT_EQ(f[kFracTop100] + f[kFracTop1000] + f[kFracRest], 0.0);
  EXPECT_NEAR(f[kMeanLogRank], log_rank, 1e-12);
  EXPECT_NEAR(f[kLogLength], std::log(5.0), 1e-12);
  EXPECT_NEAR(f[kTypeTokenRatio], 0.8, 1e-12);
}

TEST(Features, OneDeepTokenMovesBucketsAndMoments) {
  // Unigram model where content word i has count 600 - i, so its rank is i.
  const Vocabulary v(words(1000));
  std::string doc;
  for (std::size_t i = 0; i < 600; ++i) {
    for (std::size_t k = 0; k < 600 - i; ++k) doc += "w" + std::to_string(i) + " ";
  }
  const std::vector<TokenSequence> corpus{encode(v, doc)};
  const NGramLM lm = train_lm(corpus, v, 1, 0.5);
  const double total = 600.0 * 601.0 / 2.0 + 1.0;
  auto p = [&](std::size_t i) { return (600.0 - i + 0.5) / (total + 0.5 * 1002); };

  const TokenSequence a{2, 3, 4, 5, 6};
  const TokenSequence b{2, 3, 502, 5, 6};
  ASSERT_EQ(observe_text(lm, b)[2].rank, 500u);
  const auto fa = extract_features(lm, a);
  const auto fb = extract_features(lm, b);
  EXPECT_NEAR(fb[kMeanLogProb] - fa[kMeanLogProb], (std::log(p(500)) - std::log(p(2))) / 5.0, 1e-12);
  EXPECT_GT(fb[kStdLogProb], fa[kStdLogProb]);
  EXPECT_EQ(fa[kFracTop10], 1.0);
  EXPECT_EQ(fb[kFracTop10], 0.8);
  EXPECT_EQ(fb[kFracTop1000], 0.2);
  EXPECT_GT(fb[kMeanLogRank], fa[kMeanLogRank]);
  EXPECT_EQ(fb[kLogLength], fa[kLogLength]);
  EXPECT_EQ(fb[kTypeTokenRatio], fa[kTypeTokenRatio]);
}

TEST(Features, AccumulatorMatchesTwoPass) {
  const auto& lab = small_lab();
  const auto text = encode(*lab.vocab, lab.eval_human.front().text);
  const auto obs = observe_text(*lab.lm, text);
  FeatureAccumulator acc(lab.vocab->size());
  for (std::size_t i = 0; i + 1 < text.size(); ++i) {
    const auto with = acc.with_candidate(obs[i], text[i]);
    const auto ref = features_from_observations(std::span(obs).first(i + 1), TokenSpan(text).first(i + 1));
    for (std::size_t k = 0; k < kFeatureDim; ++k) ASSERT_NEAR(with[k], ref[k], 1e-9) << kFeatureNames[k];
    acc.add(obs[i], text[i]);
  }
}

// Random design matrix for the logistic checks.
void random_data(std::size_t n, std::size_t d, std::uint64_t seed, std::vector<std::vector<double>>& rows,
                 std::vector<int>& labels) {
  Rng rng(seed);
  rows.assign(n, std::vector<double>(d));
  labels.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& x : rows[i]) x = rng.uniform01() * 4.0 - 2.0;
    labels[i] = rng.uniform01() < 0.5 ? 1 : 0;
  }
}

TEST(Logistic, GradientMatchesCentralDifferences) {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  random_data(40, 6, 3, rows, labels);
  Rng rng(8);
  for (double l2 : {0.0, 0.1}) {
    std::vector<double> w(7);
    for (auto& x : w) x = rng.uniform01() - 0.5;
    const auto g = logistic_gradient(w, rows, labels, l2);
    const double h = 1e-5;
    double worst = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
      auto up = w, down = w;
      up[j] += h;
      down[j] -= h;
      const double fd = (logistic_loss(up, rows, labels, l2) - logistic_loss(down, rows, labels, l2)) / (2 * h);
      worst = std::max(worst, std::abs(fd - g[j]));
    }
    EXPECT_LT(worst, 1e-6) << "l2=" << l2;
  }
}

TEST(Logistic, SeparableDataIsFitExactly) {
  std::vector<std::vector<double>> rows{{-2.0}, {-1.0}, {-0.5}, {0.5}, {1.0}, {2.0}};
  const std::vector<int> labels{0, 0, 0, 1, 1, 1};
  LogisticHyperparams hp;
  hp.epochs = 200;
  const auto fit = fit_logistic(rows, labels, hp);
  EXPECT_EQ(fit.train_accuracy, 1.0);
  EXPECT_TRUE(fit.separable);
  EXPECT_GT(fit.weights[0], 0.0);
  EXPECT_LT(fit.loss_history.back(), fit.loss_history.front());
}

TEST(Logistic, FlippedLabelsNegateWeights) {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  random_data(30, 3, 5, rows, labels);
  std::vector<int> flipped(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) flipped[i] = 1 - labels[i];
  LogisticHyperparams hp;
  hp.epochs = 100;
  hp.l2 = 0.01;
  const auto a = fit_logistic(rows, labels, hp);
  const auto b = fit_logistic(rows, flipped, hp);
  for (std::size_t j = 0; j < a.weights.size(); ++j) EXPECT_NEAR(a.weights[j], -b.weights[j], 1e-6);
}

TEST(Standardizer, ConstantColumnIsDegenerate) {
  const std::vector<std::vector<double>> rows{{1.0, 5.0}, {3.0, 5.0}};
  const auto s = Standardizer::fit(rows);
  EXPECT_TRUE(s.has_degenerate());
  const auto z = s.apply(rows[0]);
  EXPECT_NEAR(z[0], -1.0, 1e-12);
  EXPECT_EQ(z[1], 0.0);
}

TEST(Detectors, EmptyTextIsNeutral) {
  const auto& d = small_detectors();
  for (const Detector* det : std::initializer_list<const Detector*>{d.logistic.get(), d.gltr.get(), d.curvature.get()}) {
    EXPECT_EQ(det->score(TokenSequence{}), DetectorScore::neutral()) << det->id();
  }
}

TEST(Detectors, TrainedDetectorsSeparateTheLab) {
  const auto& lab = small_lab();
  const auto& d = small_detectors();
  double ai = 0.0, human = 0.0;
  for (const auto& r : lab.eval_ai) ai += d.logistic->score(encode(*lab.vocab, r.text)).value;
  for (const auto& r : lab.eval_human) human += d.logistic->score(encode(*lab.vocab, r.text)).value;
  EXPECT_GT(ai / lab.eval_ai.size(), human / lab.eval_human.size() + 0.3);
}

TEST(Gltr, ScoreIsSigmoidOfTopTenFraction) {
  const auto& lab = small_lab();
  const auto& g = *small_detectors().gltr;
  const auto text = encode(*lab.vocab, lab.eval_ai.front().text);
  const double top10 = extract_features(*lab.lm, text)[kFracTop10];
  EXPECT_NEAR(g.score(text).value, sigmoid(g.a() * top10 + g.b()), 1e-12);
  EXPECT_GT(g.a(), 0.0);
}

TEST(Curvature, StatsMatchDirectSums) {
  const auto& lab = small_lab();
  const CurvatureDetector c("c", lab.lm, 2.0);
  const auto text = encode(*lab.vocab, lab.eval_human.front().text);
  double ll = 0.0, mu = 0.0, var = 0.0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    std::vector<double> lp(lab.vocab->size());
    lab.lm->conditional_into(TokenSpan(text).first(i), lp, lab.lm->order());
    ll += std::max(lp[text[i]], kLogProbFloor);
    double m = 0.0;
    for (double x : lp) m += std::exp(x) * x;
    double v = 0.0;
    for (double x : lp) v += std::exp(x) * (x - m) * (x - m);
    mu += m;
    var += v;
  }
  const double d = (ll - mu) / std::sqrt(var);
  EXPECT_NEAR(c.discrepancy(text), d, 1e-9);
  EXPECT_NEAR(c.score(text).value, 1.0 / (1.0 + std::exp(-2.0 * d)), 1e-12);
}

TEST(Curvature, NullOnModelSamples) {
  const auto& lab = small_lab();
  const CurvatureDetector c("c", lab.lm);
  const SamplingConfig full(1.0, lab.vocab->size(), 1.0);
  Rng rng(2718);
  std::vector<double> ds;
  while (ds.size() < 500) {
    TokenSequence text;
    while (text.size() < 400) {
      const TokenId t = sample_multinomial(mask_candidates(lab.lm->next_logits({}, text), full), rng);
      text.push_back(t);
      if (t == lab.vocab->eos_id()) break;
    }
    ds.push_back(c.discrepancy(text));
  }
  EXPECT_LT(std::abs(eval::mean(ds)), 0.15) << "mean d " << eval::mean(ds);
}

TEST(WatermarkAdapter, SigmoidOfHalfZ) {
  EXPECT_EQ(WatermarkDetector::score_from_z(0.0), 0.5);
  EXPECT_NEAR(WatermarkDetector::score_from_z(6.0), 0.9525741268224334, 1e-12);
}

TEST(WatermarkAdapter, VocabularyBinding) {
  const auto& lab = small_lab();
  const WatermarkDetector w("wm", {}, lab.vocab->size(), lab.vocab->hash());
  EXPECT_NO_THROW(w.check_vocabulary(*lab.vocab));
  const Vocabulary other({"x"});
  EXPECT_THROW(w.check_vocabulary(other), DataError);
}

// Every detector's incremental scorer agrees with from-scratch scoring.
TEST(Incremental, MatchesFromScratch) {
  const auto& lab = small_lab();
  const auto& d = small_detectors();
  watermark::WatermarkParams uni;
  uni.scheme = watermark::Scheme::unigram;
  const WatermarkDetector kgw("kgw", {}, lab.vocab->size(), lab.vocab->hash());
  const WatermarkDetector unigram("unigram", uni, lab.vocab->size(), lab.vocab->hash());
  const auto text = encode(*lab.vocab, lab.eval_ai.front().text);
  for (const Detector* det : std::initializer_list<const Detector*>{d.logistic.get(), d.gltr.get(),
                                                                      d.curvature.get(), &kgw, &unigram}) {
    auto inc = det->incremental();
    ASSERT_TRUE(inc) << det->id();
    TokenSequence prefix;
    for (std::size_t i = 0; i < 30; ++i) {
      inc->prepare_step();
      for (TokenId c = 1; c < lab.vocab->size(); c += 7) {
        TokenSequence full = prefix;
        full.push_back(c);
        const auto want = det->score(full);
        const auto got = inc->score_candidate(c);
        ASSERT_NEAR(got.value, want.value, 1e-9) << det->id() << " step " << i << " candidate " << c;
        ASSERT_EQ(got.flag, want.flag);
      }
      inc->push(text[i]);
      prefix.push_back(text[i]);
      ASSERT_EQ(inc->length(), prefix.size());
    }
  }
}

TEST(DetectorIo, RoundTripPreservesScores) {
  const auto& lab = small_lab();
  const auto& d = small_detectors();
  const WatermarkDetector kgw("kgw", {}, lab.vocab->size(), lab.vocab->hash());
  const auto text = encode(*lab.vocab, lab.eval_human.back().text);
  for (const Detector* det : std::initializer_list<const Detector*>{d.logistic.get(), d.gltr.get(),
                                                                      d.curvature.get(), &kgw}) {
    const auto back = parse_detector(serialize_detector(*det), lab.lm);
    EXPECT_EQ(back->id(), det->id());
    EXPECT_EQ(back->kind(), det->kind());
    EXPECT_EQ(back->score(text).value, det->score(text).value) << det->id();
    EXPECT_EQ(serialize_detector(*back), serialize_detector(*det));
  }
}

TEST(DetectorIo, RejectsForeignModelAndGarbage) {
  const auto& d = small_detectors();
  const auto other = ten_token_lm();
  EXPECT_THROW(parse_detector(serialize_detector(*d.logistic), other), DataError);
  EXPECT_THROW(parse_detector("{", other), DataError);
  EXPECT_THROW(parse_detector(R"({"format":"advpara-detector","version":1,"kind":"mystery","id":"x"})", other),
               DataError);
}

}  // namespace
}  // namespace advpara::detectors
