#include "fixtures.hpp"

#include <cmath>
#include <filesystem>
#include <limits>

#include <unistd.h>

namespace advpara::testing {

LogitVector logits_from(const std::vector<double>& probs) {
  LogitVector out{std::vector<double>(probs.size())};
  for (std::size_t i = 0; i < probs.size(); ++i) {
    out.log_probs[i] = probs[i] > 0.0 ? std::log(probs[i]) : -std::numeric_limits<double>::infinity();
  }
  return out;
}

LogitVector FnLM::next_logits(TokenSpan source, TokenSpan prefix) const { return logits_from(fn_(source, prefix)); }

detectors::DetectorScore FnDetector::score(TokenSpan text) const {
  if (text.size() < min_length_) return detectors::DetectorScore::neutral();
  return {fn_(text), detectors::ScoreFlag::ok};
}

const synth::Lab& small_lab() {
  static const synth::Lab lab = [] {
    synth::LabConfig cfg;
    cfg.seed = 11;
    cfg.lm_docs = 600;
    cfg.train_size = 60;
    cfg.eval_size = 30;
    cfg.threads = 4;
    return synth::build_lab(cfg);
  }();
  return lab;
}

const synth::LabDetectors& small_detectors() {
  static const synth::LabDetectors d = synth::train_detectors(small_lab());
  return d;
}

std::string temp_path(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("advpara-test-" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

}  // namespace advpara::testing
