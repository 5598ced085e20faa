#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/binomial.hpp>

#include "advpara/eval/stats.hpp"
#include "advpara/watermark/watermark.hpp"
#include "advpara/util/error.hpp"
#include "fixtures.hpp"

namespace advpara::watermark {
namespace {

using advpara::testing::logits_from;

WatermarkParams params(Scheme scheme, double gamma, double delta, std::uint64_t key = 0) {
  WatermarkParams p;
  p.scheme = scheme;
  p.gamma = gamma;
  p.delta = delta;
  p.key = key;
  return p;
}

// Kolmogorov-Smirnov distance between green counts and Binomial(n, p). Both
// CDFs are step functions on the integers, so comparing them at the atoms
// gives the exact supremum.
double ks_distance_binomial(std::vector<std::size_t> counts, std::size_t n, double p) {
  std::sort(counts.begin(), counts.end());
  const boost::math::binomial_distribution<> null(static_cast<double>(n), p);
  const double m = static_cast<double>(counts.size());
  double d = 0.0;
  std::size_t below = 0;
  for (std::size_t k = 0; k <= n; ++k) {
    while (below < counts.size() && counts[below] <= k) ++below;
    d = std::max(d, std::abs(below / m - boost::math::cdf(null, static_cast<double>(k))));
  }
  return d;
}

TEST(Partition, KgwDeterministicAndFloorSized) {
  const auto p = params(Scheme::kgw, 0.25, 2.0, 17);
  const auto a = green_partition_kgw(5, p, 1000);
  EXPECT_EQ(a, green_partition_kgw(5, p, 1000));
  EXPECT_EQ(a.popcount(), 250u);
  EXPECT_FALSE(a == green_partition_kgw(6, p, 1000));
  std::size_t count = 0;
  for (TokenId t = 0; t < 1000; ++t) count += a.is_green(t) ? 1 : 0;
  EXPECT_EQ(count, 250u);
}

TEST(Partition, UnigramIsContextFreeAndKeyed) {
  const auto p = params(Scheme::unigram, 0.5, 2.0, 3);
  EXPECT_EQ(green_partition_unigram(p, 10).popcount(), 5u);
  EXPECT_EQ(green_partition_unigram(p, 1000), green_partition_unigram(p, 1000));
  EXPECT_FALSE(green_partition_unigram(p, 1000) == green_partition_unigram(params(Scheme::unigram, 0.5, 2.0, 4), 1000));
}

TEST(Partition, SeedFormula) {
  EXPECT_EQ(kgw_seed(9, 4), mix64(9ULL ^ 4ULL));
  const auto p = params(Scheme::kgw, 0.3, 2.0, 9);
  EXPECT_EQ(green_partition_kgw(4, p, 50), partition_from_seed(kgw_seed(9, 4), 50, 0.3));
}

TEST(Bias, ZeroDeltaIsIdentity) {
  const auto l = logits_from({0.1, 0.2, 0.3, 0.4});
  const auto m = partition_from_seed(1, 4, 0.5);
  EXPECT_EQ(apply_watermark_bias(l, m, 0.0).log_probs, l.log_probs);
}

TEST(Bias, LargeDeltaDrainsRedMass) {
  const auto l = logits_from({0.1, 0.2, 0.3, 0.4, 0.0, 0.0, 0.0, 0.0});
  const auto m = partition_from_seed(8, 8, 0.5);
  const auto p = apply_watermark_bias(l, m, 50.0).probabilities();
  double green_input = 0.0;
  double red = 0.0;
  for (TokenId t = 0; t < 8; ++t) {
    if (m.is_green(t)) {
      green_input += std::exp(l.log_probs[t]);
    } else {
      red += p[t];
    }
  }
  ASSERT_GT(green_input, 0.0);
  EXPECT_LT(red, 1e-6);
}

TEST(Bias, ShiftIdentityOnUniform) {
  const auto l = logits_from(std::vector<double>(10, 0.1));
  const auto m = partition_from_seed(2, 10, 0.5);
  const auto p = apply_watermark_bias(l, m, std::log(3.0)).probabilities();
  // Five green at 3x, five red at 1x: 3/20 and 1/20.
  for (TokenId t = 0; t < 10; ++t) EXPECT_NEAR(p[t], m.is_green(t) ? 0.15 : 0.05, 1e-12);
}

TEST(ZScore, Formula) {
  EXPECT_NEAR(z_score(50, 100, 0.25), 5.7735026918962576, 1e-9);
  EXPECT_EQ(z_score(25, 100, 0.25), 0.0);
  EXPECT_EQ(z_score(0, 0, 0.25), 0.0);
}

TEST(Detection, CountsGreenTransitions) {
  const auto p = params(Scheme::kgw, 0.25, 2.0, 5);
  const TokenSequence text{3, 7, 7, 2, 9};
  std::size_t green = 0;
  for (std::size_t i = 1; i < text.size(); ++i) green += green_partition_kgw(text[i - 1], p, 20).is_green(text[i]);
  const auto d = detect_watermark(text, p, 20);
  EXPECT_EQ(d.scored, 4u);
  EXPECT_EQ(d.green, green);
  EXPECT_TRUE(detect_watermark(TokenSequence{3}, p, 20).insufficient_length);
  EXPECT_FALSE(detect_watermark(TokenSequence{3}, params(Scheme::unigram, 0.25, 2.0), 20).insufficient_length);
}

class NullOnUniformTokens : public ::testing::TestWithParam<Scheme> {};

TEST_P(NullOnUniformTokens, ZIsStandardAndCountsAreBinomial) {
  const auto p = params(GetParam(), 0.25, 2.0, 0);
  const std::size_t scored = GetParam() == Scheme::kgw ? 199 : 200;
  Rng rng(5);
  std::vector<double> zs;
  std::vector<std::size_t> greens;
  for (int i = 0; i < 500; ++i) {
    TokenSequence t(200);
    for (auto& id : t) id = static_cast<TokenId>(rng.uniform_below(500));
    const auto d = detect_watermark(t, p, 500);
    ASSERT_EQ(d.scored, scored);
    zs.push_back(d.z);
    greens.push_back(d.green);
  }
  EXPECT_LT(std::abs(eval::mean(zs)), 0.15);
  EXPECT_NEAR(eval::stddev(zs), 1.0, 0.1);
  // Critical value of the one-sample KS test at alpha = 0.01, n = 500
  // (conservative for a discrete null).
  EXPECT_LT(ks_distance_binomial(greens, scored, 0.25), 1.63 / std::sqrt(500.0));
}

INSTANTIATE_TEST_SUITE_P(Detection, NullOnUniformTokens, ::testing::Values(Scheme::kgw, Scheme::unigram),
                         [](const auto& info) { return std::string(to_string(info.param)); });

// Unwatermarked text is independent of the key, so each document is checked
// under its own key. The green list holds floor(gamma |V|) ids, which shifts
// the null mean of z by T (f - gamma) / sqrt(T gamma (1 - gamma)) with
// f = floor(gamma |V|) / |V|; the oracle removes that known offset.
TEST(Detection, NullOnHumanCorpus) {
  const auto& lab = advpara::testing::small_lab();
  const synth::World world(lab.config.world);
  const auto docs = world.documents(500, "wm-null");
  const double v = static_cast<double>(lab.vocab->size());
  const double f = std::floor(0.25 * v) / v;
  {
    const Scheme scheme = Scheme::kgw;
    std::vector<double> centred;
    for (std::size_t i = 0; i < docs.size(); ++i) {
      const auto p = params(scheme, 0.25, 2.0, derive_seed(99, "wm-null-key", std::to_string(i)));
      const auto d = detect_watermark(encode(*lab.vocab, docs[i]), p, lab.vocab->size());
      const double t = static_cast<double>(d.scored);
      centred.push_back(d.z - t * (f - 0.25) / std::sqrt(t * 0.25 * 0.75));
    }
    EXPECT_LT(std::abs(eval::mean(centred)), 0.15) << to_string(scheme);
  }
}

TEST(Generation, ZeroDeltaMatchesPlainSampling) {
  const auto& lab = advpara::testing::small_lab();
  const SamplingConfig s(0.99, 50, 1.0, 31);
  const GenerationLimits lim{20, 40};
  const TokenSequence prefix = encode(*lab.vocab, "the");
  const auto wm = generate_watermarked(*lab.lm, prefix, params(Scheme::kgw, 0.25, 0.0), s, lim);

  Rng rng(31);
  TokenSequence ctx = prefix;
  TokenSequence plain;
  while (plain.size() < lim.max_len) {
    auto logits = lab.lm->next_logits({}, ctx);
    if (plain.size() < lim.min_len) {
      logits.log_probs[0] = -std::numeric_limits<double>::infinity();
      log_normalize(logits.log_probs);
    }
    const TokenId next = sample_multinomial(mask_candidates(logits, s), rng);
    if (next == 0) break;
    plain.push_back(next);
    ctx.push_back(next);
  }
  EXPECT_EQ(wm, plain);
  EXPECT_EQ(wm, generate_watermarked(*lab.lm, prefix, params(Scheme::unigram, 0.25, 0.0, 8), s, lim));
}

TEST(Generation, StrongBiasIsDetectable) {
  const auto& lab = advpara::testing::small_lab();
  const SamplingConfig s(0.99, 50, 1.0, 4);
  const GenerationLimits lim{200, 600};
  for (Scheme scheme : {Scheme::kgw, Scheme::unigram}) {
    const auto p = params(scheme, 0.25, 4.0, 0);
    const auto out = generate_watermarked(*lab.lm, encode(*lab.vocab, "the"), p, s, lim);
    EXPECT_GE(out.size(), 200u);
    EXPECT_LE(out.size(), 600u);
    EXPECT_GT(detect_watermark(out, p, lab.vocab->size()).z, 4.0) << to_string(scheme);
  }
}

TEST(Params, Validation) {
  EXPECT_THROW(params(Scheme::kgw, 0.0, 2.0).validate(), ConfigError);
  EXPECT_THROW(params(Scheme::kgw, 0.5, -1.0).validate(), ConfigError);
  EXPECT_THROW(parse_scheme("red"), ConfigError);
  EXPECT_EQ(parse_scheme("unigram"), Scheme::unigram);
  EXPECT_NE(params(Scheme::kgw, 0.25, 2.0, 1).key_hash(), params(Scheme::kgw, 0.25, 2.0, 2).key_hash());
}

}  // namespace
}  // namespace advpara::watermark
