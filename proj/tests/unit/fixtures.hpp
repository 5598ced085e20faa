#pragma once

#include <functional>
#include <string>
#include <vector>

#include "advpara/detectors/detector.hpp"
#include "advpara/lm/conditional_lm.hpp"
#include "advpara/synth/lab.hpp"

namespace advpara::testing {

LogitVector logits_from(const std::vector<double>& probs);

// Next-token probabilities supplied by a callback.
class FnLM final : public ConditionalLM {
 public:
  using Fn = std::function<std::vector<double>(TokenSpan source, TokenSpan prefix)>;

  FnLM(std::size_t vocab_size, Fn fn) : vocab_size_(vocab_size), fn_(std::move(fn)) {}

  std::size_t vocab_size() const override { return vocab_size_; }
  TokenId eos_id() const override { return 0; }
  LogitVector next_logits(TokenSpan source, TokenSpan prefix) const override;

 private:
  std::size_t vocab_size_;
  Fn fn_;
};

// Scores supplied by a callback; no incremental scorer.
class FnDetector final : public detectors::Detector {
 public:
  using Fn = std::function<double(TokenSpan text)>;

  explicit FnDetector(Fn fn, std::size_t min_length = 0, std::string id = "fn")
      : fn_(std::move(fn)), min_length_(min_length), id_(std::move(id)) {}

  std::string id() const override { return id_; }
  std::string kind() const override { return "fn"; }
  std::size_t min_length() const override { return min_length_; }
  detectors::DetectorScore score(TokenSpan text) const override;

 private:
  Fn fn_;
  std::size_t min_length_;
  std::string id_;
};

// A small lab (shared across tests in one binary) and its detectors.
const synth::Lab& small_lab();
const synth::LabDetectors& small_detectors();

std::string temp_path(const std::string& name);

}  // namespace advpara::testing
