#include "advpara/attack/attack.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "advpara/util/parallel.hpp"

namespace advpara::attack {

std::size_t AttackConfig::output_cap(std::size_t source_len) const {
  return max_output_tokens.value_or(2 * source_len + 64);
}

void AttackConfig::validate() const {
  if (max_output_tokens && *max_output_tokens < 1) throw ConfigError("max_output_tokens must be >= 1");
  if (recursion_depth < 1) throw ConfigError("recursion_depth must be >= 1");
  if (threads < 1) throw ConfigError("threads must be >= 1");
}

std::string_view to_string(TieBreak t) {
  switch (t) {
    case TieBreak::score:
      return "score";
    case TieBreak::probability:
      return "probability";
    case TieBreak::token_id:
      return "token_id";
  }
  return "score";
}

TieBreak parse_tie_break(std::string_view s) {
  if (s == "score") return TieBreak::score;
  if (s == "probability") return TieBreak::probability;
  if (s == "token_id") return TieBreak::token_id;
  throw DataError("unknown tie-break tag: " + std::string(s));
}

TokenSequence without_eos(TokenSpan seq, TokenId eos) {
  TokenSequence out(seq.begin(), seq.end());
  if (!out.empty() && out.back() == eos) out.pop_back();
  return out;
}

TokenSequence simple_paraphrase(const ConditionalLM& paraphraser, TokenSpan source, const AttackConfig& cfg,
                                Rng& rng) {
  cfg.validate();
  if (source.empty()) throw ConfigError("simple_paraphrase: empty source");
  const std::size_t cap = cfg.output_cap(source.size());
  TokenSequence y;
  while (y.size() < cap) {
    const TokenId next = sample_multinomial(mask_candidates(paraphraser.next_logits(source, y), cfg.sampling), rng);
    y.push_back(next);
    if (next == paraphraser.eos_id()) break;
  }
  return y;
}

TokenSequence simple_paraphrase(const ConditionalLM& paraphraser, TokenSpan source, const AttackConfig& cfg) {
  Rng rng(cfg.sampling.seed());
  return simple_paraphrase(paraphraser, source, cfg, rng);
}

RecursiveResult recursive_paraphrase(const ConditionalLM& paraphraser, TokenSpan source, const AttackConfig& cfg,
                                     std::size_t depth) {
  if (depth < 1) throw ConfigError("recursion depth must be >= 1");
  Rng rng(cfg.sampling.seed());
  RecursiveResult result;
  TokenSequence current(source.begin(), source.end());
  for (std::size_t pass = 0; pass < depth; ++pass) {
    TokenSequence out = simple_paraphrase(paraphraser, current, cfg, rng);
    result.passes.push_back(out);
    current = without_eos(out, paraphraser.eos_id());
    if (current.empty() && pass + 1 < depth) {
      throw AttackError("recursive paraphrase: pass " + std::to_string(pass + 1) + " produced empty output", pass);
    }
    result.output = std::move(out);
  }
  return result;
}

namespace {

// True when candidate a beats b under (min score, max prob, min id).
bool better(const AttackStep& s, std::size_t a, std::size_t b) {
  if (s.scores[a].value != s.scores[b].value) return s.scores[a].value < s.scores[b].value;
  if (s.probs[a] != s.probs[b]) return s.probs[a] > s.probs[b];
  return s.candidates[a] < s.candidates[b];
}

TieBreak classify(const AttackStep& s, std::size_t best) {
  TieBreak tag = TieBreak::score;
  for (std::size_t i = 0; i < s.candidates.size(); ++i) {
    if (i == best || s.scores[i].value != s.scores[best].value) continue;
    if (s.probs[i] != s.probs[best]) {
      tag = std::max(tag, TieBreak::probability);
    } else {
      tag = TieBreak::token_id;
    }
  }
  return tag;
}

}  // namespace

AttackTrace adversarial_paraphrase(const ConditionalLM& paraphraser, const detectors::Detector& guidance,
                                   TokenSpan source, const AttackConfig& cfg) {
  cfg.validate();
  if (source.empty()) throw ConfigError("adversarial_paraphrase: empty source");
  const std::size_t cap = cfg.output_cap(source.size());
  const TokenId eos = paraphraser.eos_id();

  AttackTrace trace;
  trace.guidance_id = guidance.id();
  trace.input_mode = guidance.input_mode();
  auto scorer = cfg.use_incremental ? guidance.incremental() : nullptr;

  TokenSequence& y = trace.output;
  while (true) {
    const std::size_t step_index = trace.steps.size();
    const CandidateSet cands = mask_candidates(paraphraser.next_logits(source, y), cfg.sampling);

    AttackStep step;
    step.candidates = cands.token_ids;
    step.probs = cands.source_probs;
    step.scores.resize(cands.size());
    try {
      // eos prints nothing, so the detector reads y ⊕ eos as y.
      const bool has_eos = std::ranges::find(cands.token_ids, eos) != cands.token_ids.end();
      const detectors::DetectorScore stop_score = has_eos ? guidance.score(y) : detectors::DetectorScore{};
      if (scorer) {
        scorer->prepare_step();
        parallel_for(cands.size(), cfg.threads, [&](std::size_t i) {
          const TokenId c = cands.token_ids[i];
          step.scores[i] = c == eos ? stop_score : scorer->score_candidate(c);
        });
      } else {
        parallel_for(cands.size(), cfg.threads, [&](std::size_t i) {
          const TokenId c = cands.token_ids[i];
          if (c == eos) {
            step.scores[i] = stop_score;
            return;
          }
          TokenSequence input(y);
          input.push_back(c);
          step.scores[i] = guidance.score(input);
        });
      }
    } catch (const std::exception& e) {
      throw AttackError("guidance detector failed at step " + std::to_string(step_index) + ": " + e.what(),
                        step_index);
    }
    for (const auto& s : step.scores) {
      if (!(s.value >= 0.0 && s.value <= 1.0)) {
        throw AttackError("guidance detector returned a score outside [0, 1] at step " + std::to_string(step_index),
                          step_index);
      }
    }
    trace.detector_calls += cands.size();

    std::size_t best = 0;
    for (std::size_t i = 1; i < cands.size(); ++i) {
      if (better(step, i, best)) best = i;
    }
    step.chosen = cands.token_ids[best];
    step.tie_break = classify(step, best);

    y.push_back(step.chosen);
    if (scorer) scorer->push(step.chosen);
    trace.steps.push_back(std::move(step));
    if (y.back() == eos) break;
    if (y.size() >= cap) {
      trace.truncated = true;
      break;
    }
  }
  return trace;
}

TokenSequence greedy_decode(const ConditionalLM& paraphraser, TokenSpan source, std::size_t max_tokens) {
  TokenSequence y;
  while (y.size() < max_tokens) {
    const LogitVector logits = paraphraser.next_logits(source, y);
    TokenId best = 0;
    for (std::size_t t = 1; t < logits.size(); ++t) {
      if (logits.log_probs[t] > logits.log_probs[best]) best = static_cast<TokenId>(t);
    }
    y.push_back(best);
    if (best == paraphraser.eos_id()) break;
  }
  return y;
}

std::optional<TraceViolation> check_trace(const AttackTrace& trace) {
  if (trace.steps.size() != trace.output.size()) {
    return TraceViolation{trace.steps.size(), "trace length differs from output length"};
  }
  std::size_t calls = 0;
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const AttackStep& s = trace.steps[i];
    if (s.candidates.empty() || s.candidates.size() != s.scores.size() || s.candidates.size() != s.probs.size()) {
      return TraceViolation{i, "malformed step"};
    }
    calls += s.candidates.size();
    if (trace.output[i] != s.chosen) return TraceViolation{i, "chosen token differs from output"};
    const auto it = std::find(s.candidates.begin(), s.candidates.end(), s.chosen);
    if (it == s.candidates.end()) return TraceViolation{i, "chosen token is not a candidate"};
    const auto c = static_cast<std::size_t>(it - s.candidates.begin());
    for (std::size_t j = 0; j < s.candidates.size(); ++j) {
      if (j == c) continue;
      if (s.scores[j].value < s.scores[c].value) return TraceViolation{i, "a candidate scored lower than the choice"};
      if (better(s, j, c)) return TraceViolation{i, "tie-break rule not followed"};
    }
    if (classify(s, c) != s.tie_break) return TraceViolation{i, "tie-break tag does not match"};
  }
  if (calls != trace.detector_calls) return TraceViolation{trace.steps.size(), "detector call count mismatch"};
  return std::nullopt;
}

}  // namespace advpara::attack
