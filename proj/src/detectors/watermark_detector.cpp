#include "advpara/detectors/watermark_detector.hpp"

#include <optional>

#include "advpara/util/error.hpp"

namespace advpara::detectors {
namespace {

class WatermarkIncremental final : public IncrementalScorer {
 public:
  explicit WatermarkIncremental(const WatermarkDetector& det) : det_(det) {
    if (det_.params().scheme == watermark::Scheme::unigram) {
      mask_ = watermark::green_partition_unigram(det_.params(), det_.vocab_size());
    }
  }

  void prepare_step() override {
    if (det_.params().scheme == watermark::Scheme::kgw && !history_.empty()) {
      mask_ = watermark::green_partition_kgw(history_.back(), det_.params(), det_.vocab_size());
    }
  }

  DetectorScore score_candidate(TokenId c) const override {
    if (history_.size() + 1 < det_.min_length()) return DetectorScore::neutral();
    auto [green, scored] = extended(c);
    return {WatermarkDetector::score_from_z(watermark::z_score(green, scored, det_.params().gamma)), ScoreFlag::ok};
  }

  void push(TokenId token) override {
    if (det_.params().scheme == watermark::Scheme::kgw && !history_.empty()) prepare_step();
    std::tie(green_, scored_) = extended(token);
    history_.push_back(token);
  }

  std::size_t length() const override { return history_.size(); }

 private:
  std::pair<std::size_t, std::size_t> extended(TokenId c) const {
    if (c >= det_.vocab_size()) throw InvariantError("watermark scorer: token id out of range");
    const bool counts = det_.params().scheme == watermark::Scheme::unigram || !history_.empty();
    if (!counts) return {green_, scored_};
    return {green_ + (mask_.is_green(c) ? 1 : 0), scored_ + 1};
  }

  const WatermarkDetector& det_;
  TokenSequence history_;
  watermark::GreenMask mask_;
  std::size_t green_ = 0;
  std::size_t scored_ = 0;
};

}  // namespace

WatermarkDetector::WatermarkDetector(std::string id, watermark::WatermarkParams params, std::size_t vocab_size,
                                     std::uint64_t vocab_hash)
    : id_(std::move(id)), params_(params), vocab_size_(vocab_size), vocab_hash_(vocab_hash) {
  params_.validate();
  if (vocab_size_ == 0) throw ConfigError("watermark detector: empty vocabulary");
}

double WatermarkDetector::score_from_z(double z) { return sigmoid(z / 2.0); }

watermark::Detection WatermarkDetector::detect(TokenSpan text) const {
  return watermark::detect_watermark(text, params_, vocab_size_);
}

DetectorScore WatermarkDetector::score(TokenSpan text) const {
  const auto d = detect(text);
  if (d.insufficient_length) return DetectorScore::neutral();
  return {score_from_z(d.z), ScoreFlag::ok};
}

std::unique_ptr<IncrementalScorer> WatermarkDetector::incremental() const {
  return std::make_unique<WatermarkIncremental>(*this);
}

void WatermarkDetector::check_vocabulary(const Vocabulary& vocab) const {
  if (vocab.size() != vocab_size_ || vocab.hash() != vocab_hash_) {
    throw DataError("watermark detector '" + id_ + "' was built for a different vocabulary");
  }
}

}  // namespace advpara::detectors
