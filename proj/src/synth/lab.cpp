#include "advpara/synth/lab.hpp"

#include <algorithm>
#include <limits>

#include "advpara/text/tokenizer.hpp"
#include "advpara/util/error.hpp"
#include "advpara/util/parallel.hpp"

namespace advpara::synth {

ParaphraserConfig lab_paraphraser_config() {
  ParaphraserConfig c;
  c.cache_weight = 0.25;
  return c;
}

void LabConfig::validate() const {
  world.validate();
  paraphraser.validate();
  if (lm_docs == 0 || lm_order == 0) throw ConfigError("lab needs a non-empty LM corpus and order >= 1");
  if (prompt_words == 0) throw ConfigError("prompt_words must be positive");
  if (train_size == 0 || eval_size == 0) throw ConfigError("lab splits must be non-empty");
  if (min_tokens == 0 || min_tokens > max_tokens) throw ConfigError("bad length bounds");
  SamplingConfig(ai_top_p, ai_top_k, ai_temperature);
  SamplingConfig(SamplingConfig::kDefaultTopP, SamplingConfig::kDefaultTopK, attack_temperature);
}

SamplingConfig LabConfig::attack_sampling(std::string_view record_id) const {
  return SamplingConfig(SamplingConfig::kDefaultTopP, SamplingConfig::kDefaultTopK, attack_temperature,
                        derive_seed(seed, "attack", record_id));
}

std::vector<TokenSequence> Lab::encode_all(const std::vector<data::Record>& records) const {
  std::vector<TokenSequence> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(encode(*vocab, r.text));
  return out;
}

std::vector<data::Record> human_records(const World& world, const Vocabulary& vocab, std::size_t n,
                                        std::string_view task, const LabConfig& cfg) {
  Rng rng(derive_seed(cfg.seed, task));
  std::vector<data::Record> out;
  for (std::size_t i = 0; out.size() < n; ++i) {
    if (i >= 4 * n + 16) throw ConfigError("world documents keep falling outside the length bounds");
    data::Record r;
    r.id = std::string(task) + "-" + std::to_string(i);
    r.text = world.document(rng);
    r.label = data::Label::human;
    const auto len = encode(vocab, r.text).size();
    if (len >= cfg.min_tokens && len <= cfg.max_tokens) out.push_back(std::move(r));
  }
  return out;
}

TokenSequence sample_continuation(const ConditionalLM& lm, const Vocabulary& vocab, TokenSpan source,
                                  TokenSpan prompt, std::size_t length, const SamplingConfig& sampling) {
  Rng rng(sampling.seed());
  TokenSequence context(prompt.begin(), prompt.end());
  TokenSequence out;
  out.reserve(length);
  while (out.size() < length) {
    LogitVector logits = lm.next_logits(source, context);
    logits.log_probs[lm.eos_id()] = -std::numeric_limits<double>::infinity();
    log_normalize(logits.log_probs);
    const TokenId next = sample_multinomial(mask_candidates(logits, sampling), rng);
    out.push_back(next);
    context.push_back(next);
  }
  const TokenId stop = vocab.lookup(".");
  if (auto it = std::ranges::find(out.rbegin(), out.rend(), stop); it != out.rend()) {
    out.erase(it.base(), out.end());
  }
  return out;
}

std::vector<data::Record> ai_records(const ConditionalLM& generator, const Vocabulary& vocab,
                                     std::span<const data::Record> sources, std::size_t n, std::string_view task,
                                     const LabConfig& cfg) {
  std::vector<std::optional<data::Record>> made(sources.size());
  parallel_for(sources.size(), cfg.threads, [&](std::size_t i) {
    const auto& src = sources[i];
    const auto prompt_text = data::first_words(src.text, cfg.prompt_words);
    if (prompt_text.empty()) return;
    const SamplingConfig sampling(cfg.ai_top_p, cfg.ai_top_k, cfg.ai_temperature,
                                  derive_seed(cfg.seed, task, src.id));
    const TokenSequence prompt = encode(vocab, prompt_text);
    const TokenSequence seed_doc = encode(vocab, src.text);
    const TokenSequence out = sample_continuation(generator, vocab, {}, prompt, seed_doc.size(), sampling);
    if (out.size() < cfg.min_tokens || out.size() > cfg.max_tokens) return;
    data::Record r;
    r.id = std::string(task) + "-" + src.id;
    r.text = decode(vocab, out);
    r.label = data::Label::ai;
    r.meta["source_id"] = src.id;
    r.meta["prompt"] = prompt_text;
    made[i] = std::move(r);
  });
  std::vector<data::Record> out;
  for (auto& m : made) {
    if (m && out.size() < n) out.push_back(std::move(*m));
  }
  if (out.size() < n) {
    throw ConfigError("only " + std::to_string(out.size()) + " of " + std::to_string(n) +
                      " generated texts fall within the length bounds");
  }
  return out;
}

std::vector<TokenSequence> with_prefixes(std::span<const TokenSequence> seqs, std::size_t per_text,
                                         std::size_t min_len, std::uint64_t seed, std::string_view task) {
  Rng rng(derive_seed(seed, task));
  std::vector<TokenSequence> out(seqs.begin(), seqs.end());
  for (const auto& s : seqs) {
    if (s.size() <= min_len) continue;
    for (std::size_t j = 0; j < per_text; ++j) {
      const std::size_t len = min_len + rng.uniform_below(s.size() - min_len + 1);
      out.emplace_back(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(len));
    }
  }
  return out;
}

LabDetectors train_detectors(const Lab& lab, const detectors::LogisticHyperparams& hp) {
  const auto ai = lab.encode_all(lab.train_ai);
  const auto human = lab.encode_all(lab.train_human);
  const std::size_t min_len = detectors::LogisticDetector::kMinLength;
  const auto ai_aug = with_prefixes(ai, lab.config.train_prefixes, min_len, lab.config.seed, "prefix-ai");
  const auto human_aug = with_prefixes(human, lab.config.train_prefixes, min_len, lab.config.seed, "prefix-human");
  LabDetectors d;
  d.logistic = std::make_shared<detectors::LogisticDetector>(
      detectors::train_logistic(ai_aug, human_aug, lab.lm, hp, "logistic"));
  d.gltr = std::make_shared<detectors::GltrDetector>(detectors::calibrate_gltr(ai, human, lab.lm, hp, "gltr"));
  d.curvature = std::make_shared<detectors::CurvatureDetector>("curvature", lab.lm);
  return d;
}

Lab build_lab(const LabConfig& cfg) {
  cfg.validate();
  Lab lab;
  lab.config = cfg;
  const World world(cfg.world);

  const auto lm_corpus = world.documents(cfg.lm_docs, "lm-corpus");
  auto vocab = std::make_shared<Vocabulary>(build_vocab(lm_corpus, 1));
  std::vector<TokenSequence> encoded;
  encoded.reserve(lm_corpus.size());
  for (const auto& d : lm_corpus) encoded.push_back(encode(*vocab, d));
  lab.lm = std::make_shared<NGramLM>(train_lm(encoded, *vocab, cfg.lm_order, cfg.lm_add_k));
  lab.vocab = vocab;
  lab.paraphraser = std::make_shared<CacheParaphraser>(lab.lm, cfg.paraphraser);

  lab.train_human = human_records(world, *vocab, cfg.train_size, "human-train", cfg);
  lab.eval_human = human_records(world, *vocab, cfg.eval_size, "human-eval", cfg);
  // Spare sources absorb generations that miss the length bounds.
  const auto train_seeds = human_records(world, *vocab, cfg.train_size + cfg.train_size / 4 + 8, "seed-train", cfg);
  const auto eval_seeds = human_records(world, *vocab, cfg.eval_size + cfg.eval_size / 4 + 8, "seed-eval", cfg);
  lab.train_ai = ai_records(*lab.lm, *vocab, train_seeds, cfg.train_size, "ai-train", cfg);
  lab.eval_ai = ai_records(*lab.lm, *vocab, eval_seeds, cfg.eval_size, "ai-eval", cfg);
  return lab;
}

}  // namespace advpara::synth
