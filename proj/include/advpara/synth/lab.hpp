#pragma once

#include <memory>
#include <vector>

#include "advpara/data/dataset.hpp"
#include "advpara/detectors/logistic.hpp"
#include "advpara/detectors/zero_shot.hpp"
#include "advpara/lm/ngram.hpp"
#include "advpara/lm/paraphraser.hpp"
#include "advpara/synth/world.hpp"

namespace advpara::synth {

/// A complete desk-scale setting: human documents from a World, a background
/// n-gram trained on a disjoint human split, the cache paraphraser over it,
/// and "AI" texts sampled from the n-gram, each continuing the opening words
/// of an unseen human document and matched to that document's length.
ParaphraserConfig lab_paraphraser_config();

struct LabConfig {
  WorldConfig world{};
  std::uint64_t seed = 2024;
  std::size_t lm_docs = 2000;
  std::size_t lm_order = 3;
  double lm_add_k = 0.001;
  // A lighter cache than the paraphraser default keeps guided outputs fluent.
  ParaphraserConfig paraphraser = lab_paraphraser_config();
  // AI/human texts of each split (detector training and evaluation).
  std::size_t train_size = 300;
  std::size_t eval_size = 200;
  double ai_temperature = 0.5;
  double ai_top_p = 0.9;
  std::size_t ai_top_k = 50;
  std::size_t prompt_words = 20;
  // Paraphrasing runs sample at this temperature (top-p/top-k stay default).
  double attack_temperature = 0.2;
  // Extra random-length prefixes of every training text, so the trained
  // detectors also see partial outputs.
  std::size_t train_prefixes = 2;
  std::size_t min_tokens = data::kDefaultMinTokens;
  std::size_t max_tokens = data::kDefaultMaxTokens;
  std::size_t threads = 1;

  void validate() const;
  // Per-record attack sampling: default masks, attack_temperature, seed
  // derived from (seed, "attack", record_id).
  SamplingConfig attack_sampling(std::string_view record_id) const;
};

struct Lab {
  LabConfig config;
  std::shared_ptr<const Vocabulary> vocab;
  std::shared_ptr<const NGramLM> lm;
  std::shared_ptr<const CacheParaphraser> paraphraser;
  std::vector<data::Record> train_ai;
  std::vector<data::Record> train_human;
  std::vector<data::Record> eval_ai;
  std::vector<data::Record> eval_human;

  std::vector<TokenSequence> encode_all(const std::vector<data::Record>& records) const;
};

Lab build_lab(const LabConfig& cfg);

/// Human records from `world`, ids "<task>-<i>", kept when their length is
/// within the config bounds.
std::vector<data::Record> human_records(const World& world, const Vocabulary& vocab, std::size_t n,
                                        std::string_view task, const LabConfig& cfg);

/// Samples `length` tokens after `prompt` with eos excluded, then cuts back
/// to the last sentence end when there is one.
TokenSequence sample_continuation(const ConditionalLM& lm, const Vocabulary& vocab, TokenSpan source,
                                  TokenSpan prompt, std::size_t length, const SamplingConfig& sampling);

/// One generated record per source: the continuation of its first
/// `prompt_words` words, as long as the source itself. Outputs outside the
/// length bounds are dropped; stops after `n` kept records.
std::vector<data::Record> ai_records(const ConditionalLM& generator, const Vocabulary& vocab,
                                     std::span<const data::Record> sources, std::size_t n, std::string_view task,
                                     const LabConfig& cfg);

/// Every sequence plus `per_text` prefixes of uniform random length in
/// [min_len, |seq|], drawn from derive_seed(seed, task).
std::vector<TokenSequence> with_prefixes(std::span<const TokenSequence> seqs, std::size_t per_text,
                                         std::size_t min_len, std::uint64_t seed, std::string_view task);

struct LabDetectors {
  std::shared_ptr<const detectors::LogisticDetector> logistic;
  std::shared_ptr<const detectors::GltrDetector> gltr;
  std::shared_ptr<const detectors::CurvatureDetector> curvature;
};

// Trains the logistic and GLTR detectors on the training split.
LabDetectors train_detectors(const Lab& lab, const detectors::LogisticHyperparams& hp = {});

}  // namespace advpara::synth
