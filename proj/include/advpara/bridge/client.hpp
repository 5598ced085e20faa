#pragma once

#include <memory>
#include <mutex>
#include <string>

#include "advpara/bridge/protocol.hpp"
#include "advpara/bridge/transport.hpp"
#include "advpara/detectors/detector.hpp"
#include "advpara/eval/quality.hpp"
#include "advpara/lm/conditional_lm.hpp"

namespace advpara::bridge {

// The backend answered with an error response.
class RemoteError : public Error {
 public:
  RemoteError(std::string code, const std::string& message)
      : Error("bridge error [" + code + "]: " + message), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

/// Owns a transport and performs the handshake on construction. Requests
/// carry correlation ids counting up from 1 (the handshake is 0), and each
/// response must echo the id and kind of its request. Thread-safe: calls
/// are serialized.
class BridgeClient {
 public:
  explicit BridgeClient(std::unique_ptr<Transport> transport);

  const Capabilities& capabilities() const { return caps_; }

  LogitsResult logits(const LogitsRequest& request);
  double detector_score(const DetectorRequest& request);
  JudgeResult judge(const JudgeRequest& request);

 private:
  ResponseBody call(RequestPayload payload);

  std::mutex mutex_;
  std::unique_ptr<Transport> transport_;
  std::uint64_t next_id_ = 1;
  Capabilities caps_;
};

/// A backend detector seen through the Detector interface. Token inputs are
/// decoded to text with `vocab` before they are sent; scores from
/// lower_is_ai detectors are flipped to 1 - s.
class BridgeDetector final : public detectors::Detector {
 public:
  BridgeDetector(std::shared_ptr<BridgeClient> client, std::string detector_id,
                 std::shared_ptr<const Vocabulary> vocab);

  std::string id() const override { return id_; }
  std::string kind() const override { return "bridge"; }
  std::size_t min_length() const override { return info_.min_length; }
  detectors::InputMode input_mode() const override { return detectors::InputMode::text; }
  detectors::DetectorScore score(TokenSpan text) const override;

  double score_text(const std::string& text) const;

 private:
  std::shared_ptr<BridgeClient> client_;
  std::string id_;
  DetectorInfo info_;
  std::shared_ptr<const Vocabulary> vocab_;
};

/// A backend paraphraser over core token ids. Requires the logits
/// capability, core tokenization and a matching vocabulary size; every
/// returned vector is checked to sum to 1 within 1e-6.
class BridgeLM final : public ConditionalLM {
 public:
  static constexpr double kNormTolerance = 1e-6;

  BridgeLM(std::shared_ptr<BridgeClient> client, std::size_t vocab_size, std::string system_tag = {});

  std::size_t vocab_size() const override { return vocab_size_; }
  TokenId eos_id() const override { return Vocabulary::kEosId; }
  LogitVector next_logits(TokenSpan source, TokenSpan prefix) const override;

 private:
  std::shared_ptr<BridgeClient> client_;
  std::size_t vocab_size_;
  std::string system_tag_;
};

class BridgeJudge final : public eval::Judge {
 public:
  BridgeJudge(std::shared_ptr<BridgeClient> client, std::string judge_id);

  std::string id() const override { return id_; }
  int rate(std::string_view original, std::string_view paraphrase) const override;
  eval::Verdict compare(std::string_view original, std::string_view a, std::string_view b) const override;

 private:
  std::shared_ptr<BridgeClient> client_;
  std::string id_;
};

}  // namespace advpara::bridge
