#pragma once

#include <cstddef>
#include <memory>
#include <string>

#include "advpara/text/vocabulary.hpp"

namespace advpara::detectors {

enum class ScoreFlag { ok, insufficient_length };

/// Detector output in [0, 1]; higher means more AI-like.
struct DetectorScore {
  double value = 0.5;
  ScoreFlag flag = ScoreFlag::ok;

  static DetectorScore neutral() { return {0.5, ScoreFlag::insufficient_length}; }
  bool operator==(const DetectorScore&) const = default;
};

// What the detector consumes when the attack loop scores candidates.
enum class InputMode { tokens, text };

/// Scores `prefix + candidate` for many candidates at one step without
/// re-reading the prefix. prepare_step() runs once per step; score_candidate()
/// is const and may be called concurrently between prepare_step() and push().
/// Scores match Detector::score on the full sequence to 1e-9.
class IncrementalScorer {
 public:
  virtual ~IncrementalScorer() = default;

  virtual void prepare_step() = 0;
  virtual DetectorScore score_candidate(TokenId candidate) const = 0;
  // Appends the chosen token to the cached prefix.
  virtual void push(TokenId token) = 0;
  virtual std::size_t length() const = 0;
};

/// A text detector. Immutable after construction; score() must be safe under
/// concurrent callers.
class Detector {
 public:
  virtual ~Detector() = default;

  virtual std::string id() const = 0;
  virtual std::string kind() const = 0;
  virtual std::size_t min_length() const = 0;
  virtual InputMode input_mode() const { return InputMode::tokens; }

  // Inputs shorter than min_length() score DetectorScore::neutral().
  virtual DetectorScore score(TokenSpan text) const = 0;

  // nullptr when the detector only supports from-scratch scoring.
  virtual std::unique_ptr<IncrementalScorer> incremental() const { return nullptr; }
};

double sigmoid(double x);

}  // namespace advpara::detectors
