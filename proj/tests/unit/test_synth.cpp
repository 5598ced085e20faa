#include <gtest/gtest.h>

#include <set>

#include "advpara/synth/lab.hpp"
#include "advpara/text/tokenizer.hpp"
#include "advpara/util/error.hpp"
#include "fixtures.hpp"

namespace advpara::synth {
namespace {

TEST(World, DocumentsAreDeterministicPerTask) {
  const World w({});
  const auto a = w.documents(5, "t");
  EXPECT_EQ(a, w.documents(5, "t"));
  EXPECT_NE(a, w.documents(5, "u"));
  WorldConfig other;
  other.seed = 8;
  EXPECT_NE(a, World(other).documents(5, "t"));
}

TEST(World, LengthsStayInBounds) {
  const World w({});
  const auto docs = w.documents(50, "len");
  const auto cw = w.content_words();
  EXPECT_EQ(std::set<std::string>(cw.begin(), cw.end()).size(), cw.size());
  for (const auto& d : docs) {
    const auto n = segment(d).size();
    EXPECT_GE(n, w.config().min_doc_tokens);
    // A document ends on a sentence boundary, so it may run one sentence long.
    EXPECT_LE(n, w.config().max_doc_tokens + 60);
  }
}

TEST(World, InvalidConfigIsRejected) {
  WorldConfig c;
  c.topics = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.collocation_strength = 1.5;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Lab, SplitsAreDisjointAndLabelled) {
  const auto& lab = advpara::testing::small_lab();
  EXPECT_EQ(lab.eval_ai.size(), lab.config.eval_size);
  EXPECT_EQ(lab.eval_human.size(), lab.config.eval_size);
  std::set<std::string> ids;
  for (const auto* split : {&lab.train_ai, &lab.train_human, &lab.eval_ai, &lab.eval_human}) {
    for (const auto& r : *split) {
      EXPECT_TRUE(ids.insert(r.id).second) << r.id;
      const auto n = encode(*lab.vocab, r.text).size();
      EXPECT_GE(n, lab.config.min_tokens);
      EXPECT_LE(n, lab.config.max_tokens);
    }
  }
  for (const auto& r : lab.eval_ai) EXPECT_EQ(r.label, data::Label::ai);
  for (const auto& r : lab.eval_human) EXPECT_EQ(r.label, data::Label::human);
}

TEST(Lab, RebuildIsIdenticalAcrossThreadCounts) {
  LabConfig c;
  c.seed = 3;
  c.lm_docs = 200;
  c.train_size = 10;
  c.eval_size = 10;
  c.threads = 1;
  const Lab a = build_lab(c);
  c.threads = 4;
  const Lab b = build_lab(c);
  EXPECT_EQ(a.eval_ai, b.eval_ai);
  EXPECT_EQ(a.train_human, b.train_human);
  EXPECT_EQ(a.vocab->hash(), b.vocab->hash());
  EXPECT_EQ(a.lm->serialize(), b.lm->serialize());
}

TEST(Lab, AttackSamplingUsesDefaultMasks) {
  const LabConfig c;
  const auto s = c.attack_sampling("r1");
  EXPECT_EQ(s.top_p(), 0.99);
  EXPECT_EQ(s.top_k(), 50u);
  EXPECT_EQ(s.temperature(), c.attack_temperature);
  EXPECT_EQ(s.seed(), derive_seed(c.seed, "attack", "r1"));
  EXPECT_NE(s.seed(), c.attack_sampling("r2").seed());
}

TEST(WithPrefixes, CountsAndBounds) {
  const std::vector<TokenSequence> seqs{TokenSequence(30, 2), TokenSequence(12, 3)};
  const auto out = with_prefixes(seqs, 3, 5, 9, "p");
  ASSERT_EQ(out.size(), 8u);
  EXPECT_EQ(out[0], seqs[0]);
  EXPECT_EQ(out[1], seqs[1]);
  for (std::size_t i = 2; i < out.size(); ++i) {
    EXPECT_GE(out[i].size(), 5u);
    EXPECT_LE(out[i].size(), 30u);
  }
  EXPECT_EQ(out, with_prefixes(seqs, 3, 5, 9, "p"));
  EXPECT_EQ(with_prefixes(seqs, 0, 5, 9, "p"), seqs);
}

}  // namespace
}  // namespace advpara::synth
