#include "advpara/bridge/client.hpp"

#include <algorithm>
#include <cmath>

#include "advpara/text/tokenizer.hpp"

namespace advpara::bridge {

namespace {

Response exchange(Transport& transport, const Request& request) {
  transport.send(serialize(request));
  const auto line = transport.receive();
  if (!line) throw TransportError("bridge closed the connection");
  Response response = parse_response(*line);
  if (response.id != request.id) {
    throw ProtocolError("response id " + std::to_string(response.id) + " does not match request id " +
                        std::to_string(request.id));
  }
  if (response.kind != request.kind()) {
    throw ProtocolError("response kind " + std::string(to_string(response.kind)) + " does not match request kind " +
                        std::string(to_string(request.kind())));
  }
  if (const auto* err = std::get_if<ErrorInfo>(&response.body)) throw RemoteError(err->code, err->message);
  return response;
}

}  // namespace

BridgeClient::BridgeClient(std::unique_ptr<Transport> transport) : transport_(std::move(transport)) {
  if (!transport_) throw TransportError("null transport");
  const Response r = exchange(*transport_, Request{0, HandshakeRequest{}});
  caps_ = std::get<Capabilities>(r.body);
  if (caps_.protocol != kProtocolVersion) {
    throw ProtocolError("bridge speaks protocol " + std::to_string(caps_.protocol) + ", expected " +
                        std::to_string(kProtocolVersion));
  }
}

ResponseBody BridgeClient::call(RequestPayload payload) {
  std::lock_guard lock(mutex_);
  Request request{next_id_++, std::move(payload)};
  return exchange(*transport_, request).body;
}

LogitsResult BridgeClient::logits(const LogitsRequest& request) {
  if (!caps_.logits) throw ConfigError("bridge does not offer logits");
  return std::get<LogitsResult>(call(request));
}

double BridgeClient::detector_score(const DetectorRequest& request) {
  if (!caps_.find_detector(request.detector)) throw ConfigError("bridge has no detector '" + request.detector + "'");
  return std::get<ScoreResult>(call(request)).score;
}

JudgeResult BridgeClient::judge(const JudgeRequest& request) {
  if (!caps_.judge) throw ConfigError("bridge does not offer a judge");
  return std::get<JudgeResult>(call(request));
}

BridgeDetector::BridgeDetector(std::shared_ptr<BridgeClient> client, std::string detector_id,
                               std::shared_ptr<const Vocabulary> vocab)
    : client_(std::move(client)), id_(std::move(detector_id)), vocab_(std::move(vocab)) {
  if (!client_ || !vocab_) throw ConfigError("bridge detector needs a client and a vocabulary");
  const DetectorInfo* info = client_->capabilities().find_detector(id_);
  if (!info) throw ConfigError("bridge has no detector '" + id_ + "'");
  info_ = *info;
}

double BridgeDetector::score_text(const std::string& text) const {
  const double raw = client_->detector_score(DetectorRequest{id_, text});
  if (!std::isfinite(raw) || raw < 0.0 || raw > 1.0) {
    throw ProtocolError("bridge detector '" + id_ + "' returned a score outside [0, 1]");
  }
  return info_.orientation == Orientation::higher_is_ai ? raw : 1.0 - raw;
}

detectors::DetectorScore BridgeDetector::score(TokenSpan text) const {
  if (text.size() < min_length()) return detectors::DetectorScore::neutral();
  return {score_text(decode(*vocab_, text)), detectors::ScoreFlag::ok};
}

BridgeLM::BridgeLM(std::shared_ptr<BridgeClient> client, std::size_t vocab_size, std::string system_tag)
    : client_(std::move(client)), vocab_size_(vocab_size), system_tag_(std::move(system_tag)) {
  if (!client_) throw ConfigError("bridge LM needs a client");
  const Capabilities& caps = client_->capabilities();
  if (!caps.logits) throw ConfigError("bridge does not offer logits");
  if (caps.tokenization != Tokenization::core) {
    throw ConfigError("bridge LM over core token ids needs core tokenization");
  }
  if (caps.vocab_size != vocab_size_) {
    throw ConfigError("bridge vocabulary has " + std::to_string(caps.vocab_size) + " tokens, expected " +
                      std::to_string(vocab_size_));
  }
}

LogitVector BridgeLM::next_logits(TokenSpan source, TokenSpan prefix) const {
  LogitsRequest req;
  req.system_tag = system_tag_;
  req.source = TokenSequence(source.begin(), source.end());
  req.prefix = TokenSequence(prefix.begin(), prefix.end());
  LogitVector out{client_->logits(req).log_probs};
  if (out.size() != vocab_size_) {
    throw ProtocolError("bridge returned " + std::to_string(out.size()) + " log-probs, expected " +
                        std::to_string(vocab_size_));
  }
  try {
    check_normalized(out, kNormTolerance);
  } catch (const InvariantError& e) {
    throw ProtocolError(std::string("bridge logits are not a distribution: ") + e.what());
  }
  return out;
}

BridgeJudge::BridgeJudge(std::shared_ptr<BridgeClient> client, std::string judge_id)
    : client_(std::move(client)), id_(std::move(judge_id)) {
  if (!client_) throw ConfigError("bridge judge needs a client");
  const auto& judges = client_->capabilities().judges;
  if (std::find(judges.begin(), judges.end(), id_) == judges.end()) {
    throw ConfigError("bridge has no judge '" + id_ + "'");
  }
}

int BridgeJudge::rate(std::string_view original, std::string_view paraphrase) const {
  const auto r = client_->judge(JudgeRequest{id_, std::string(original), std::string(paraphrase), std::nullopt});
  if (!r.rating || *r.rating < 1 || *r.rating > 5) throw ProtocolError("bridge judge returned no rating in 1..5");
  return *r.rating;
}

eval::Verdict BridgeJudge::compare(std::string_view original, std::string_view a, std::string_view b) const {
  const auto r = client_->judge(JudgeRequest{id_, std::string(original), std::string(a), std::string(b)});
  if (!r.verdict) throw ProtocolError("bridge judge returned no verdict");
  return *r.verdict;
}

}  // namespace advpara::bridge
