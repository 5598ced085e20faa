#include <gtest/gtest.h>

#include <cmath>

#include "advpara/sampling/sampling.hpp"
#include "advpara/util/error.hpp"
#include "advpara/util/rng.hpp"
#include "fixtures.hpp"

namespace advpara {
namespace {

using testing::logits_from;

TEST(TopP, KeepsFirstTokenWhenItReachesP) {
  const auto c = top_p_mask(logits_from({0.5, 0.3, 0.15, 0.05}), 0.5);
  EXPECT_EQ(c.token_ids, (std::vector<TokenId>{0}));
  EXPECT_NEAR(c.probs[0], 1.0, 1e-12);
}

TEST(TopP, FullMassKeepsEveryNonzeroToken) {
  const auto c = top_p_mask(logits_from({0.2, 0.0, 0.5, 0.3}), 1.0);
  EXPECT_EQ(c.token_ids, (std::vector<TokenId>{2, 3, 0}));
}

TEST(TopP, CrossingTokenIsKept) {
  const auto c = top_p_mask(logits_from({0.4, 0.4, 0.2}), 0.5);
  EXPECT_EQ(c.token_ids, (std::vector<TokenId>{0, 1}));
  EXPECT_NEAR(c.probs[0], 0.5, 1e-12);
  EXPECT_NEAR(c.kept_mass(), 0.8, 1e-12);
}

TEST(TopK, PrefixOfSortedList) {
  const auto full = full_candidates(logits_from({0.1, 0.3, 0.05, 0.25, 0.3}));
  const auto c = top_k_mask(full, 2);
  EXPECT_EQ(c.token_ids, (std::vector<TokenId>{1, 4}));
  EXPECT_NEAR(c.probs[0] + c.probs[1], 1.0, 1e-12);
  EXPECT_EQ(top_k_mask(full, 9).token_ids, full.token_ids);
}

TEST(TopK, EqualProbabilitiesKeepLowestIds) {
  const auto full = full_candidates(logits_from({0.0, 1.0 / 3, 1.0 / 3, 1.0 / 3}));
  EXPECT_EQ(top_k_mask(full, 2).token_ids, (std::vector<TokenId>{1, 2}));
}

TEST(Temperature, IdentityAtOneAndSharpensBelow) {
  const auto l = logits_from({0.6, 0.3, 0.1});
  EXPECT_EQ(apply_temperature(l, 1.0).log_probs, l.log_probs);
  const auto p = apply_temperature(l, 0.5).probabilities();
  const double z = 0.36 + 0.09 + 0.01;
  EXPECT_NEAR(p[0], 0.36 / z, 1e-12);
  EXPECT_NEAR(p[2], 0.01 / z, 1e-12);
  EXPECT_THROW(apply_temperature(l, 0.0), ConfigError);
}

TEST(MaskCandidates, TemperatureThenTopPThenTopK) {
  // T = 0.5 squares the probabilities: 0.36, 0.09, 0.01 of 0.46.
  const SamplingConfig cfg(0.9, 1, 0.5);
  const auto c = mask_candidates(logits_from({0.6, 0.3, 0.1}), cfg);
  EXPECT_EQ(c.token_ids, (std::vector<TokenId>{0}));
  const SamplingConfig wide(0.9, 50, 0.5);
  EXPECT_EQ(mask_candidates(logits_from({0.6, 0.3, 0.1}), wide).token_ids, (std::vector<TokenId>{0, 1}));
}

TEST(SamplingConfig, Defaults) {
  const SamplingConfig cfg;
  EXPECT_EQ(cfg.top_p(), 0.99);
  EXPECT_EQ(cfg.top_k(), 50u);
  EXPECT_THROW(SamplingConfig(0.0, 50), ConfigError);
  EXPECT_THROW(SamplingConfig(0.9, 0), ConfigError);
}

TEST(Multinomial, SingleCandidate) {
  const auto c = full_candidates(logits_from({0.0, 0.0, 1.0}));
  Rng rng(3);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sample_multinomial(c, rng), 2u);
}

TEST(Multinomial, EmpiricalFrequency) {
  const auto c = full_candidates(logits_from({0.75, 0.25}));
  Rng rng(12345);
  const int n = 100000;
  int zeros = 0;
  for (int i = 0; i < n; ++i) zeros += sample_multinomial(c, rng) == 0 ? 1 : 0;
  EXPECT_NEAR(static_cast<double>(zeros) / n, 0.75, 0.01);
}

TEST(Multinomial, SeededSequenceRepeats) {
  const auto c = full_candidates(logits_from({0.2, 0.3, 0.1, 0.4}));
  Rng a(99), b(99);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(sample_multinomial(c, a), sample_multinomial(c, b));
}

TEST(Rng, UniformRangeAndBound) {
  Rng rng(1);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform01();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ASSERT_LT(rng.uniform_below(7), 7u);
  }
  EXPECT_NE(derive_seed(1, "a", "x"), derive_seed(1, "a", "y"));
  EXPECT_NE(derive_seed(1, "a", "x"), derive_seed(2, "a", "x"));
  EXPECT_EQ(derive_seed(5, "task", "r"), derive_seed(5, "task", "r"));
}

TEST(Rng, UniformBelowIsUnbiased) {
  Rng rng(77);
  std::vector<int> counts(6, 0);
  const int n = 60000;
  for (int i = 0; i < n; ++i) ++counts[rng.uniform_below(6)];
  for (int c : counts) EXPECT_NEAR(c / static_cast<double>(n), 1.0 / 6.0, 0.01);
}

}  // namespace
}  // namespace advpara
