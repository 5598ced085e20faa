#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "advpara/detectors/detector.hpp"
#include "advpara/lm/conditional_lm.hpp"
#include "advpara/sampling/sampling.hpp"
#include "advpara/util/error.hpp"

namespace advpara::attack {

class AttackError : public Error {
 public:
  AttackError(const std::string& what, std::size_t step) : Error(what), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

struct AttackConfig {
  SamplingConfig sampling{};
  // Unset: 2 * |source| + 64.
  std::optional<std::size_t> max_output_tokens;
  std::size_t recursion_depth = 1;
  // Candidate-scoring workers inside one adversarial step.
  std::size_t threads = 1;
  bool use_incremental = true;

  std::size_t output_cap(std::size_t source_len) const;
  void validate() const;
};

// Why the chosen candidate won: lowest score outright, or a score tie broken
// by paraphraser probability, or a further tie broken by smaller id.
enum class TieBreak { score, probability, token_id };

std::string_view to_string(TieBreak t);
TieBreak parse_tie_break(std::string_view s);

struct AttackStep {
  std::vector<TokenId> candidates;
  std::vector<double> probs;  // paraphraser probability of each candidate (unmasked)
  std::vector<detectors::DetectorScore> scores;
  TokenId chosen = 0;
  TieBreak tie_break = TieBreak::score;
};

struct AttackTrace {
  std::string guidance_id;
  detectors::InputMode input_mode = detectors::InputMode::tokens;
  std::vector<AttackStep> steps;
  TokenSequence output;  // ends in eos unless truncated
  std::size_t detector_calls = 0;
  bool truncated = false;
};

/// Autoregressive multinomial sampling from top_k(top_p(p(. | source, y)))
/// until eos (kept as the last token) or the output cap.
TokenSequence simple_paraphrase(const ConditionalLM& paraphraser, TokenSpan source, const AttackConfig& cfg,
                                Rng& rng);
TokenSequence simple_paraphrase(const ConditionalLM& paraphraser, TokenSpan source, const AttackConfig& cfg);

struct RecursiveResult {
  TokenSequence output;
  std::vector<TokenSequence> passes;
};

/// `depth` chained simple paraphrases sharing one rng stream (seeded from
/// cfg.sampling.seed()); each pass's output minus its eos is the next source.
RecursiveResult recursive_paraphrase(const ConditionalLM& paraphraser, TokenSpan source, const AttackConfig& cfg,
                                     std::size_t depth);

/// Detector-guided paraphrasing. Each step masks the paraphraser's next-token
/// distribution with top_k(top_p(.)), scores y + c for every candidate c with
/// the guidance detector (which never sees the source), and appends the
/// candidate with the lowest score; ties go to the higher paraphraser
/// probability, then the smaller id. eos is non-printing, so its candidate
/// score is the score of y itself. Stops after eos or at the output cap.
AttackTrace adversarial_paraphrase(const ConditionalLM& paraphraser, const detectors::Detector& guidance,
                                   TokenSpan source, const AttackConfig& cfg);

// Argmax decoding of the unmasked distribution (ties to the smaller id).
TokenSequence greedy_decode(const ConditionalLM& paraphraser, TokenSpan source, std::size_t max_tokens);

// Strips one trailing eos, if present.
TokenSequence without_eos(TokenSpan seq, TokenId eos);

struct TraceViolation {
  std::size_t step = 0;
  std::string reason;
};

/// Exact per-step optimality, trace/output agreement, and call accounting.
std::optional<TraceViolation> check_trace(const AttackTrace& trace);

// One JSON object per step; scores and probabilities printed with 9 decimals.
std::string trace_to_jsonl(const AttackTrace& trace, std::string_view record_id);

struct TraceFileStep {
  std::string record_id;
  std::size_t step = 0;
  std::vector<TokenId> candidates;
  std::vector<double> probs;
  std::vector<double> scores;
  TokenId chosen = 0;
  TieBreak tie_break = TieBreak::score;
};

std::vector<TraceFileStep> parse_trace_jsonl(std::string_view text);

/// Validation on 9-decimal trace files: the chosen score is the minimum, and
/// a probability/id tie-break tag is only present when the minimum is shared.
std::optional<TraceViolation> check_trace_file(const std::vector<TraceFileStep>& steps);

}  // namespace advpara::attack
