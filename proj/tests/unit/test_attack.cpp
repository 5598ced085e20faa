#include <gtest/gtest.h>

#include <set>

#include "advpara/attack/attack.hpp"
#include "advpara/util/error.hpp"
#include "fixtures.hpp"

namespace advpara::attack {
namespace {

using advpara::testing::FnDetector;
using advpara::testing::FnLM;
using advpara::testing::small_detectors;
using advpara::testing::small_lab;

std::vector<TokenSequence> lab_sources(std::size_t n) {
  const auto& lab = small_lab();
  std::vector<TokenSequence> out;
  for (std::size_t i = 0; i < n && i < lab.eval_ai.size(); ++i) out.push_back(encode(*lab.vocab, lab.eval_ai[i].text));
  return out;
}

AttackConfig lab_config(const std::string& id, std::size_t top_k = SamplingConfig::kDefaultTopK) {
  const auto s = small_lab().config.attack_sampling(id);
  AttackConfig cfg;
  cfg.sampling = SamplingConfig(s.top_p(), top_k, s.temperature(), s.seed());
  return cfg;
}

TEST(Config, Defaults) {
  const AttackConfig cfg;
  EXPECT_EQ(cfg.sampling.top_p(), 0.99);
  EXPECT_EQ(cfg.sampling.top_k(), 50u);
  EXPECT_EQ(cfg.output_cap(10), 84u);
  AttackConfig bad;
  bad.threads = 0;
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(Simple, HandTracedSamplingPath) {
  // Three steps of {1: .5, 2: .25, 3: .15, eos: .1}, then eos. top_p = 0.8 keeps 1, 2, 3.
  const FnLM lm(5, [](TokenSpan, TokenSpan prefix) {
    if (prefix.size() < 3) return std::vector<double>{0.1, 0.5, 0.25, 0.15, 0.0};
    return std::vector<double>{1.0, 0.0, 0.0, 0.0, 0.0};
  });
  AttackConfig cfg;
  cfg.sampling = SamplingConfig(0.8, 50, 1.0, 42);
  const TokenSequence source{1, 2, 3, 4};
  const auto out = simple_paraphrase(lm, source, cfg);

  Rng rng(42);
  TokenSequence expected;
  for (int i = 0; i < 3; ++i) {
    const double u = rng.uniform01();
    expected.push_back(u < 0.5 / 0.9 ? 1 : u < 0.75 / 0.9 ? 2 : 3);
  }
  expected.push_back(0);
  EXPECT_EQ(out, expected);
  EXPECT_EQ(out, simple_paraphrase(lm, source, cfg));
}

TEST(Simple, StopsAtCap) {
  const FnLM lm(3, [](TokenSpan, TokenSpan) { return std::vector<double>{0.0, 0.5, 0.5}; });
  AttackConfig cfg;
  cfg.max_output_tokens = 7;
  EXPECT_EQ(simple_paraphrase(lm, TokenSequence{1}, cfg).size(), 7u);
}

TEST(Simple, PureCacheStaysInSourceVocabulary) {
  const auto& lab = small_lab();
  ParaphraserConfig pc;
  pc.cache_weight = 1.0;
  pc.cache_add_k = 1e-4;
  const CacheParaphraser p(lab.lm, pc);
  for (const auto& src : lab_sources(5)) {
    AttackConfig cfg;
    cfg.sampling = SamplingConfig(0.99, 50, 1.0, 3);
    const auto out = simple_paraphrase(p, src, cfg);
    std::set<TokenId> allowed(src.begin(), src.end());
    allowed.insert(lab.vocab->eos_id());
    for (TokenId t : out) EXPECT_TRUE(allowed.count(t)) << lab.vocab->token(t);
  }
}

TEST(Recursive, DepthOneIsSimple) {
  const auto& lab = small_lab();
  for (const auto& src : lab_sources(3)) {
    const auto cfg = lab_config("r");
    EXPECT_EQ(recursive_paraphrase(*lab.paraphraser, src, cfg, 1).output,
              simple_paraphrase(*lab.paraphraser, src, cfg));
  }
}

TEST(Recursive, ChainsPassesOnOneStream) {
  const auto& lab = small_lab();
  const auto src = lab_sources(1).front();
  const auto cfg = lab_config("chain");
  const auto r3 = recursive_paraphrase(*lab.paraphraser, src, cfg, 3);
  EXPECT_EQ(r3.passes.size(), 3u);
  EXPECT_EQ(r3.output, r3.passes.back());

  Rng rng(cfg.sampling.seed());
  const auto first = simple_paraphrase(*lab.paraphraser, src, cfg, rng);
  const auto second = simple_paraphrase(*lab.paraphraser, without_eos(first, 0), cfg, rng);
  const auto r2 = recursive_paraphrase(*lab.paraphraser, src, cfg, 2);
  EXPECT_EQ(r2.passes[0], first);
  EXPECT_EQ(r2.output, second);
  EXPECT_THROW(recursive_paraphrase(*lab.paraphraser, src, cfg, 0), ConfigError);
}

TEST(Adversarial, HandEnumeratedRun) {
  const FnLM lm(5, [](TokenSpan, TokenSpan prefix) {
    if (prefix.empty()) return std::vector<double>{0.05, 0.4, 0.3, 0.2, 0.05};
    if (prefix.size() == 1) return std::vector<double>{0.5, 0.1, 0.2, 0.1, 0.1};
    return std::vector<double>{1.0, 0.0, 0.0, 0.0, 0.0};
  });
  const FnDetector det(
      [](TokenSpan y) {
        if (y.size() == 1) return std::vector<double>{0.5, 0.7, 0.2, 0.2, 0.9}[y[0]];
        if (y.size() == 2 && y[0] == 2) return std::vector<double>{0.5, 0.1, 0.8, 0.1, 0.6}[y[1]];
        return 0.5;
      },
      1);
  AttackConfig cfg;
  const auto trace = adversarial_paraphrase(lm, det, TokenSequence{1, 2, 3}, cfg);
  // Step 0: 2 and 3 tie at 0.2, 2 is likelier. Step 1: 1 and 3 tie at 0.1 with
  // equal probability, 1 has the smaller id; eos would score 0.2. Step 2: eos only.
  EXPECT_EQ(trace.output, (TokenSequence{2, 1, 0}));
  ASSERT_EQ(trace.steps.size(), 3u);
  EXPECT_EQ(trace.steps[0].tie_break, TieBreak::probability);
  EXPECT_EQ(trace.steps[1].tie_break, TieBreak::token_id);
  EXPECT_EQ(trace.steps[2].tie_break, TieBreak::score);
  EXPECT_EQ(trace.steps[0].candidates, (std::vector<TokenId>{1, 2, 3, 0, 4}));
  EXPECT_EQ(trace.steps[1].scores[0].value, 0.2);  // eos scores y itself
  EXPECT_EQ(trace.detector_calls, 11u);
  EXPECT_FALSE(trace.truncated);
  EXPECT_FALSE(check_trace(trace));
}

TEST(Adversarial, SingleCandidateIsGreedy) {
  const auto& lab = small_lab();
  const auto& guidance = *small_detectors().logistic;
  for (const auto& src : lab_sources(20)) {
    const auto cfg = lab_config("k1", 1);
    const auto trace = adversarial_paraphrase(*lab.paraphraser, guidance, src, cfg);
    EXPECT_EQ(trace.output, greedy_decode(*lab.paraphraser, src, cfg.output_cap(src.size())));
    for (const auto& step : trace.steps) ASSERT_EQ(step.candidates.size(), 1u);
  }
}

TEST(Adversarial, ConstantDetectorFallsBackToProbability) {
  const auto& lab = small_lab();
  const FnDetector constant([](TokenSpan) { return 0.5; });
  const auto src = lab_sources(1).front();
  const auto cfg = lab_config("const");
  const auto trace = adversarial_paraphrase(*lab.paraphraser, constant, src, cfg);
  EXPECT_EQ(trace.output, greedy_decode(*lab.paraphraser, src, cfg.output_cap(src.size())));
}

TEST(Adversarial, StepsAreOptimalAndIndependentOfThreads) {
  const auto& lab = small_lab();
  const auto& guidance = *small_detectors().logistic;
  for (const auto& src : lab_sources(4)) {
    auto cfg = lab_config("threads");
    const auto one = adversarial_paraphrase(*lab.paraphraser, guidance, src, cfg);
    cfg.threads = 4;
    const auto four = adversarial_paraphrase(*lab.paraphraser, guidance, src, cfg);
    EXPECT_FALSE(check_trace(one));
    EXPECT_EQ(trace_to_jsonl(one, "x"), trace_to_jsonl(four, "x"));
    cfg.use_incremental = false;
    const auto scratch = adversarial_paraphrase(*lab.paraphraser, guidance, src, cfg);
    EXPECT_EQ(scratch.output, one.output);
  }
}

TEST(Adversarial, LowersGuidanceScore) {
  const auto& lab = small_lab();
  const auto& guidance = *small_detectors().logistic;
  double simple = 0.0, adv = 0.0;
  const auto sources = lab_sources(10);
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const auto cfg = lab_config("lower-" + std::to_string(i));
    simple += guidance.score(without_eos(simple_paraphrase(*lab.paraphraser, sources[i], cfg), 0)).value;
    adv += guidance.score(without_eos(adversarial_paraphrase(*lab.paraphraser, guidance, sources[i], cfg).output, 0))
               .value;
  }
  EXPECT_LT(adv, simple);
}

TEST(Adversarial, DetectorFailureNamesTheStep) {
  const FnLM lm(3, [](TokenSpan, TokenSpan) { return std::vector<double>{0.2, 0.4, 0.4}; });
  const FnDetector broken([](TokenSpan y) {
    if (y.size() >= 3) throw std::runtime_error("boom");
    return 0.3;
  });
  try {
    adversarial_paraphrase(lm, broken, TokenSequence{1}, AttackConfig{});
    FAIL() << "expected AttackError";
  } catch (const AttackError& e) {
    EXPECT_EQ(e.step(), 2u);
  }
  const FnDetector wild([](TokenSpan) { return 1.5; });
  EXPECT_THROW(adversarial_paraphrase(lm, wild, TokenSequence{1}, AttackConfig{}), AttackError);
}

TEST(Trace, DetectsTampering) {
  const auto& lab = small_lab();
  const auto src = lab_sources(1).front();
  const auto trace = adversarial_paraphrase(*lab.paraphraser, *small_detectors().logistic, src, lab_config("t"));
  auto bad = trace;
  const auto it = std::find_if(bad.steps.begin(), bad.steps.end(), [](const AttackStep& s) { return s.candidates.size() > 1; });
  ASSERT_NE(it, bad.steps.end());
  const auto at = static_cast<std::size_t>(it - bad.steps.begin());
  it->chosen = it->chosen == it->candidates[0] ? it->candidates[1] : it->candidates[0];
  bad.output[at] = it->chosen;
  EXPECT_TRUE(check_trace(bad));
  auto miscounted = trace;
  miscounted.detector_calls += 1;
  EXPECT_TRUE(check_trace(miscounted));
}

TEST(Trace, JsonlRoundTripValidates) {
  const auto& lab = small_lab();
  const auto src = lab_sources(2).back();
  const auto trace = adversarial_paraphrase(*lab.paraphraser, *small_detectors().logistic, src, lab_config("j"));
  const auto steps = parse_trace_jsonl(trace_to_jsonl(trace, "rec-1"));
  ASSERT_EQ(steps.size(), trace.steps.size());
  EXPECT_EQ(steps[0].record_id, "rec-1");
  EXPECT_EQ(steps.back().chosen, trace.output.back());
  EXPECT_FALSE(check_trace_file(steps));

  auto bad = steps;
  ASSERT_GT(bad[0].candidates.size(), 1u);
  for (std::size_t i = 0; i < bad[0].candidates.size(); ++i) {
    if (bad[0].candidates[i] == bad[0].chosen) bad[0].scores[i] = 2.0;
  }
  EXPECT_TRUE(check_trace_file(bad));
  EXPECT_THROW(parse_trace_jsonl("{\"record\":"), DataError);
}

TEST(Greedy, TiesGoToSmallerId) {
  const FnLM lm(4, [](TokenSpan, TokenSpan prefix) {
    if (prefix.empty()) return std::vector<double>{0.1, 0.1, 0.4, 0.4};
    return std::vector<double>{1.0, 0.0, 0.0, 0.0};
  });
  EXPECT_EQ(greedy_decode(lm, TokenSequence{1}, 10), (TokenSequence{2, 0}));
  EXPECT_EQ(without_eos(TokenSequence{2, 0}, 0), (TokenSequence{2}));
  EXPECT_EQ(without_eos(TokenSequence{2}, 0), (TokenSequence{2}));
}

}  // namespace
}  // namespace advpara::attack
