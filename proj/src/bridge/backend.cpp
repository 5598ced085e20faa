#include "advpara/bridge/backend.hpp"

#include <istream>
#include <ostream>

#include <json.hpp>

#include "advpara/text/tokenizer.hpp"

namespace advpara::bridge {

namespace {

// Best-effort id and kind of a request that failed to parse.
std::pair<std::uint64_t, Kind> salvage(std::string_view line) {
  std::uint64_t id = 0;
  Kind kind = Kind::handshake;
  try {
    const auto j = nlohmann::json::parse(line);
    if (j.is_object() && j.contains("id") && j["id"].is_number_unsigned()) id = j["id"].get<std::uint64_t>();
    if (j.is_object() && j.contains("kind") && j["kind"].is_string()) kind = parse_kind(j["kind"].get<std::string>());
  } catch (const std::exception&) {
  }
  return {id, kind};
}

Response error(std::uint64_t id, Kind kind, std::string_view code, std::string message) {
  return Response{id, kind, ErrorInfo{std::string(code), std::move(message)}};
}

}  // namespace

LocalBackend::LocalBackend(std::shared_ptr<const Vocabulary> vocab) : vocab_(std::move(vocab)) {
  if (!vocab_) throw ConfigError("backend needs a vocabulary");
}

void LocalBackend::set_lm(std::shared_ptr<const ConditionalLM> lm, std::size_t max_context) {
  if (lm && lm->vocab_size() != vocab_->size()) throw ConfigError("backend LM and vocabulary differ in size");
  lm_ = std::move(lm);
  max_context_ = max_context;
}

void LocalBackend::add_detector(std::shared_ptr<const detectors::Detector> detector, Orientation orientation) {
  if (!detector) throw ConfigError("null detector");
  for (const auto& d : detectors_) {
    if (d.detector->id() == detector->id()) throw ConfigError("duplicate backend detector " + detector->id());
  }
  detectors_.push_back({std::move(detector), orientation});
}

void LocalBackend::add_judge(std::shared_ptr<const eval::Judge> judge) {
  if (!judge) throw ConfigError("null judge");
  judges_.push_back(std::move(judge));
}

Capabilities LocalBackend::capabilities() const {
  Capabilities c;
  c.tokenization = Tokenization::core;
  c.vocab_size = vocab_->size();
  c.max_context = lm_ ? max_context_ : 0;
  c.logits = lm_ != nullptr;
  c.detector_score = !detectors_.empty();
  c.judge = !judges_.empty();
  for (const auto& d : detectors_) {
    c.detectors.push_back({d.detector->id(), d.orientation, d.detector->min_length()});
  }
  for (const auto& j : judges_) c.judges.push_back(j->id());
  return c;
}

Response LocalBackend::answer(const Request& request) const {
  const std::uint64_t id = request.id;
  const Kind kind = request.kind();
  if (const auto* h = std::get_if<HandshakeRequest>(&request.payload)) {
    if (h->protocol != kProtocolVersion) {
      return error(id, kind, kErrVersion, "backend speaks protocol " + std::to_string(kProtocolVersion));
    }
    return Response{id, kind, capabilities()};
  }
  if (const auto* l = std::get_if<LogitsRequest>(&request.payload)) {
    if (!lm_) return error(id, kind, kErrUnsupported, "no paraphraser loaded");
    if (!l->source) return error(id, kind, kErrUnsupported, "this backend expects core token ids");
    const TokenSpan source(*l->source);
    const TokenSpan prefix(l->prefix);
    if (source.size() + prefix.size() > max_context_) {
      return error(id, kind, kErrBadRequest, "context exceeds max_context");
    }
    for (TokenId t : *l->source) {
      if (t >= vocab_->size()) return error(id, kind, kErrBadRequest, "token id out of range");
    }
    for (TokenId t : l->prefix) {
      if (t >= vocab_->size()) return error(id, kind, kErrBadRequest, "token id out of range");
    }
    return Response{id, kind, LogitsResult{lm_->next_logits(source, prefix).log_probs}};
  }
  if (const auto* d = std::get_if<DetectorRequest>(&request.payload)) {
    for (const auto& e : detectors_) {
      if (e.detector->id() != d->detector) continue;
      const double s = e.detector->score(encode(*vocab_, d->text)).value;
      return Response{id, kind, ScoreResult{e.orientation == Orientation::higher_is_ai ? s : 1.0 - s}};
    }
    return error(id, kind, kErrBadRequest, "unknown detector " + d->detector);
  }
  const auto& j = std::get<JudgeRequest>(request.payload);
  for (const auto& judge : judges_) {
    if (judge->id() != j.judge) continue;
    JudgeResult r;
    if (j.rival) {
      r.verdict = judge->compare(j.original, j.paraphrase, *j.rival);
    } else {
      r.rating = judge->rate(j.original, j.paraphrase);
    }
    return Response{id, kind, r};
  }
  return error(id, kind, kErrBadRequest, "unknown judge " + j.judge);
}

std::string LocalBackend::handle(std::string_view line) const {
  Request request;
  try {
    request = parse_request(line);
  } catch (const std::exception& e) {
    const auto [id, kind] = salvage(line);
    return serialize(error(id, kind, kErrBadRequest, e.what()));
  }
  try {
    return serialize(answer(request));
  } catch (const std::exception& e) {
    return serialize(error(request.id, request.kind(), kErrModel, e.what()));
  }
}

void LocalBackend::serve(std::istream& in, std::ostream& out) const {
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out << handle(line) << '\n' << std::flush;
  }
}

}  // namespace advpara::bridge
