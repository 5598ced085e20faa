#pragma once

#include <cstdint>
#include <string>

#include "advpara/detectors/detector.hpp"
#include "advpara/watermark/watermark.hpp"

namespace advpara::detectors {

/// Watermark z-score mapped to sigmoid(z / 2). Bound to one vocabulary.
class WatermarkDetector final : public Detector {
 public:
  WatermarkDetector(std::string id, watermark::WatermarkParams params, std::size_t vocab_size,
                    std::uint64_t vocab_hash);

  std::string id() const override { return id_; }
  std::string kind() const override { return "watermark"; }
  std::size_t min_length() const override { return watermark::min_detection_length(params_.scheme); }
  DetectorScore score(TokenSpan text) const override;
  std::unique_ptr<IncrementalScorer> incremental() const override;

  watermark::Detection detect(TokenSpan text) const;
  static double score_from_z(double z);

  const watermark::WatermarkParams& params() const { return params_; }
  std::size_t vocab_size() const { return vocab_size_; }
  std::uint64_t vocab_hash() const { return vocab_hash_; }
  // Throws DataError when `vocab` is not the one this detector was built for.
  void check_vocabulary(const Vocabulary& vocab) const;

 private:
  std::string id_;
  watermark::WatermarkParams params_;
  std::size_t vocab_size_;
  std::uint64_t vocab_hash_;
};

}  // namespace advpara::detectors
