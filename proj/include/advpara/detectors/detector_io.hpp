#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "advpara/detectors/detector.hpp"
#include "advpara/lm/ngram.hpp"

namespace advpara::detectors {

inline constexpr int kDetectorFormatVersion = 1;

/// JSON detector files. LM-backed detectors record the identity hash of
/// their reference model; loading against a different model is a DataError.
std::string serialize_detector(const Detector& detector);
std::unique_ptr<Detector> parse_detector(const std::string& text, std::shared_ptr<const NGramLM> lm);

void save_detector(const Detector& detector, const std::filesystem::path& path);
std::unique_ptr<Detector> load_detector(const std::filesystem::path& path, std::shared_ptr<const NGramLM> lm);

}  // namespace advpara::detectors
