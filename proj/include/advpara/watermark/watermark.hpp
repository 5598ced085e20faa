#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "advpara/lm/conditional_lm.hpp"
#include "advpara/sampling/sampling.hpp"

namespace advpara::watermark {

enum class Scheme { kgw, unigram };

std::string_view to_string(Scheme scheme);
Scheme parse_scheme(std::string_view name);

struct WatermarkParams {
  Scheme scheme = Scheme::kgw;
  double gamma = 0.25;  // green-list fraction
  double delta = 2.0;   // logit bias added to green tokens
  std::uint64_t key = 0;

  void validate() const;
  // Recorded in datasets instead of the key itself.
  std::uint64_t key_hash() const;
};

/// Green tokens of one partition; exactly floor(gamma |V|) of them.
class GreenMask {
 public:
  GreenMask() = default;
  explicit GreenMask(std::vector<bool> bits);

  bool is_green(TokenId id) const { return bits_[id]; }
  std::size_t size() const { return bits_.size(); }
  std::size_t popcount() const { return popcount_; }
  bool operator==(const GreenMask& other) const { return bits_ == other.bits_; }

 private:
  std::vector<bool> bits_;
  std::size_t popcount_ = 0;
};

// Seed of the partition after `prev_token`: mix64(key ^ prev_token).
std::uint64_t kgw_seed(std::uint64_t key, TokenId prev_token);

/// Fisher-Yates permutation of [0, |V|) driven by Rng(seed); the first
/// floor(gamma |V|) ids of the permutation are green.
GreenMask partition_from_seed(std::uint64_t seed, std::size_t vocab_size, double gamma);

GreenMask green_partition_kgw(TokenId prev_token, const WatermarkParams& params, std::size_t vocab_size);
GreenMask green_partition_unigram(const WatermarkParams& params, std::size_t vocab_size);

// Adds delta to green log-probs and renormalizes. delta == 0 is the identity.
LogitVector apply_watermark_bias(const LogitVector& logits, const GreenMask& mask, double delta);

struct GenerationLimits {
  std::size_t min_len = 200;
  std::size_t max_len = 600;
};

/// Samples a continuation of `prefix` from `model` (empty source) with the
/// watermark bias applied before sampling: bias, temperature, top-p, top-k,
/// multinomial draw. eos is suppressed until min_len tokens exist; output
/// stops at eos (not included) or at max_len. The rng comes from sampling.seed().
TokenSequence generate_watermarked(const ConditionalLM& model, TokenSpan prefix, const WatermarkParams& params,
                                   const SamplingConfig& sampling, const GenerationLimits& limits);

struct Detection {
  double z = 0.0;
  std::size_t green = 0;
  std::size_t scored = 0;
  bool insufficient_length = false;
};

/// z = (g - gamma T) / sqrt(T gamma (1 - gamma)) over the T scored positions.
/// KGW scores positions 1.. against the mask of their predecessor and needs
/// two tokens; Unigram scores every position and needs one.
Detection detect_watermark(TokenSpan text, const WatermarkParams& params, std::size_t vocab_size);

// The z formula on its own.
double z_score(std::size_t green, std::size_t scored, double gamma);

std::size_t min_detection_length(Scheme scheme);

}  // namespace advpara::watermark
