#include "advpara/bridge/protocol.hpp"

#include <cmath>
#include <limits>
#include <set>

#include <json.hpp>

namespace advpara::bridge {

using nlohmann::ordered_json;

std::string_view to_string(Kind kind) {
  switch (kind) {
    case Kind::handshake: return "handshake";
    case Kind::logits: return "logits";
    case Kind::detector_score: return "detector_score";
    case Kind::judge: return "judge";
  }
  return "handshake";
}

Kind parse_kind(std::string_view name) {
  if (name == "handshake") return Kind::handshake;
  if (name == "logits") return Kind::logits;
  if (name == "detector_score") return Kind::detector_score;
  if (name == "judge") return Kind::judge;
  throw ProtocolError("unknown message kind: " + std::string(name));
}

std::string_view to_string(Orientation o) {
  return o == Orientation::higher_is_ai ? "higher_is_ai" : "lower_is_ai";
}

Orientation parse_orientation(std::string_view name) {
  if (name == "higher_is_ai") return Orientation::higher_is_ai;
  if (name == "lower_is_ai") return Orientation::lower_is_ai;
  throw ProtocolError("unknown detector orientation: " + std::string(name));
}

std::string_view to_string(Tokenization t) { return t == Tokenization::core ? "core" : "bridge"; }

Tokenization parse_tokenization(std::string_view name) {
  if (name == "core") return Tokenization::core;
  if (name == "bridge") return Tokenization::bridge;
  throw ProtocolError("unknown tokenization mode: " + std::string(name));
}

Kind Request::kind() const {
  return std::visit(
      [](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, HandshakeRequest>) return Kind::handshake;
        if constexpr (std::is_same_v<T, LogitsRequest>) return Kind::logits;
        if constexpr (std::is_same_v<T, DetectorRequest>) return Kind::detector_score;
        if constexpr (std::is_same_v<T, JudgeRequest>) return Kind::judge;
      },
      payload);
}

const DetectorInfo* Capabilities::find_detector(std::string_view id) const {
  for (const auto& d : detectors) {
    if (d.id == id) return &d;
  }
  return nullptr;
}

namespace {

// Field access with protocol errors instead of json exceptions.
class Fields {
 public:
  Fields(const ordered_json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ProtocolError(where_ + ": expected an object");
  }

  // Rejects keys outside `allowed`.
  void only(std::initializer_list<std::string_view> allowed) const {
    for (const auto& [key, _] : j_.items()) {
      bool ok = false;
      for (auto a : allowed) ok = ok || key == a;
      if (!ok) throw ProtocolError(where_ + ": unexpected field '" + key + "'");
    }
  }

  bool has(const char* key) const { return j_.contains(key); }

  const ordered_json& at(const char* key) const {
    if (!j_.contains(key)) throw ProtocolError(where_ + ": missing field '" + key + "'");
    return j_.at(key);
  }

  std::string str(const char* key) const {
    const auto& v = at(key);
    if (!v.is_string()) throw ProtocolError(where_ + ": field '" + key + "' must be a string");
    return v.get<std::string>();
  }

  std::uint64_t uint(const char* key) const {
    const auto& v = at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      throw ProtocolError(where_ + ": field '" + key + "' must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }

  bool boolean(const char* key) const {
    const auto& v = at(key);
    if (!v.is_boolean()) throw ProtocolError(where_ + ": field '" + key + "' must be a boolean");
    return v.get<bool>();
  }

  double number(const char* key) const {
    const auto& v = at(key);
    if (!v.is_number()) throw ProtocolError(where_ + ": field '" + key + "' must be a number");
    return v.get<double>();
  }

  TokenSequence ids(const char* key) const {
    const auto& v = at(key);
    if (!v.is_array()) throw ProtocolError(where_ + ": field '" + key + "' must be an array of token ids");
    TokenSequence out;
    out.reserve(v.size());
    for (const auto& e : v) {
      if (!e.is_number_unsigned() || e.get<std::uint64_t>() > std::numeric_limits<TokenId>::max()) {
        throw ProtocolError(where_ + ": field '" + key + "' holds an invalid token id");
      }
      out.push_back(e.get<TokenId>());
    }
    return out;
  }

  const std::string& where() const { return where_; }

 private:
  const ordered_json& j_;
  std::string where_;
};

ordered_json parse_json(std::string_view line) {
  try {
    return ordered_json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw ProtocolError(std::string("malformed message: ") + e.what());
  }
}

std::string dump(const ordered_json& j) { return j.dump(-1, ' ', false, ordered_json::error_handler_t::strict); }

ordered_json payload_json(const RequestPayload& payload) {
  ordered_json p = ordered_json::object();
  std::visit(
      [&](const auto& r) {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, HandshakeRequest>) {
          p["client"] = r.client;
          p["protocol"] = r.protocol;
        } else if constexpr (std::is_same_v<T, LogitsRequest>) {
          p["system_tag"] = r.system_tag;
          if (r.source) p["source"] = *r.source;
          if (r.source_text) p["source_text"] = *r.source_text;
          p["prefix"] = r.prefix;
        } else if constexpr (std::is_same_v<T, DetectorRequest>) {
          p["detector"] = r.detector;
          p["text"] = r.text;
        } else {
          p["judge"] = r.judge;
          p["original"] = r.original;
          p["paraphrase"] = r.paraphrase;
          if (r.rival) p["rival"] = *r.rival;
        }
      },
      payload);
  return p;
}

RequestPayload parse_payload(Kind kind, const ordered_json& j) {
  const Fields f(j, std::string(to_string(kind)) + " payload");
  switch (kind) {
    case Kind::handshake: {
      f.only({"client", "protocol"});
      HandshakeRequest r;
      r.client = f.str("client");
      r.protocol = static_cast<int>(f.uint("protocol"));
      return r;
    }
    case Kind::logits: {
      f.only({"system_tag", "source", "source_text", "prefix"});
      LogitsRequest r;
      r.system_tag = f.str("system_tag");
      if (f.has("source")) r.source = f.ids("source");
      if (f.has("source_text")) r.source_text = f.str("source_text");
      if (r.source.has_value() == r.source_text.has_value()) {
        throw ProtocolError("logits payload: exactly one of 'source' and 'source_text' is required");
      }
      r.prefix = f.ids("prefix");
      return r;
    }
    case Kind::detector_score: {
      f.only({"detector", "text"});
      return DetectorRequest{f.str("detector"), f.str("text")};
    }
    case Kind::judge: {
      f.only({"judge", "original", "paraphrase", "rival"});
      JudgeRequest r;
      r.judge = f.str("judge");
      r.original = f.str("original");
      r.paraphrase = f.str("paraphrase");
      if (f.has("rival")) r.rival = f.str("rival");
      return r;
    }
  }
  throw ProtocolError("unreachable kind");
}

ordered_json capabilities_json(const Capabilities& c) {
  ordered_json j;
  j["protocol"] = c.protocol;
  j["tokenization"] = to_string(c.tokenization);
  j["vocab_size"] = c.vocab_size;
  j["max_context"] = c.max_context;
  ordered_json caps = ordered_json::array();
  if (c.logits) caps.push_back("logits");
  if (c.detector_score) caps.push_back("detector_score");
  if (c.judge) caps.push_back("judge");
  j["capabilities"] = caps;
  ordered_json dets = ordered_json::array();
  for (const auto& d : c.detectors) {
    ordered_json e;
    e["id"] = d.id;
    e["orientation"] = to_string(d.orientation);
    e["min_length"] = d.min_length;
    dets.push_back(e);
  }
  j["detectors"] = dets;
  j["judges"] = c.judges;
  return j;
}

Capabilities parse_capabilities(const ordered_json& j) {
  const Fields f(j, "handshake result");
  f.only({"protocol", "tokenization", "vocab_size", "max_context", "capabilities", "detectors", "judges"});
  Capabilities c;
  c.protocol = static_cast<int>(f.uint("protocol"));
  c.tokenization = parse_tokenization(f.str("tokenization"));
  c.vocab_size = f.uint("vocab_size");
  c.max_context = f.uint("max_context");
  const auto& caps = f.at("capabilities");
  if (!caps.is_array()) throw ProtocolError("handshake result: 'capabilities' must be an array");
  std::set<std::string> seen;
  for (const auto& e : caps) {
    if (!e.is_string()) throw ProtocolError("handshake result: capability names must be strings");
    const auto name = e.get<std::string>();
    if (!seen.insert(name).second) throw ProtocolError("handshake result: duplicate capability " + name);
    switch (parse_kind(name)) {
      case Kind::logits: c.logits = true; break;
      case Kind::detector_score: c.detector_score = true; break;
      case Kind::judge: c.judge = true; break;
      case Kind::handshake: throw ProtocolError("handshake result: 'handshake' is not a capability");
    }
  }
  const auto& dets = f.at("detectors");
  if (!dets.is_array()) throw ProtocolError("handshake result: 'detectors' must be an array");
  for (const auto& e : dets) {
    const Fields d(e, "handshake detector entry");
    d.only({"id", "orientation", "min_length"});
    DetectorInfo info;
    info.id = d.str("id");
    if (!d.has("orientation")) {
      throw ProtocolError("detector '" + info.id + "' does not declare its score orientation");
    }
    info.orientation = parse_orientation(d.str("orientation"));
    info.min_length = d.uint("min_length");
    if (c.find_detector(info.id)) throw ProtocolError("handshake result: duplicate detector " + info.id);
    c.detectors.push_back(std::move(info));
  }
  const auto& judges = f.at("judges");
  if (!judges.is_array()) throw ProtocolError("handshake result: 'judges' must be an array");
  for (const auto& e : judges) {
    if (!e.is_string()) throw ProtocolError("handshake result: judge ids must be strings");
    c.judges.push_back(e.get<std::string>());
  }
  if (!c.detectors.empty() && !c.detector_score) {
    throw ProtocolError("handshake result: detectors listed without the detector_score capability");
  }
  return c;
}

ordered_json result_json(const ResponseBody& body) {
  ordered_json j = ordered_json::object();
  std::visit(
      [&](const auto& r) {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, Capabilities>) {
          j = capabilities_json(r);
        } else if constexpr (std::is_same_v<T, LogitsResult>) {
          ordered_json lp = ordered_json::array();
          for (double v : r.log_probs) {
            if (v == -std::numeric_limits<double>::infinity()) {
              lp.push_back(nullptr);
            } else {
              lp.push_back(v);
            }
          }
          j["log_probs"] = lp;
        } else if constexpr (std::is_same_v<T, ScoreResult>) {
          j["score"] = r.score;
        } else if constexpr (std::is_same_v<T, JudgeResult>) {
          if (r.rating) j["rating"] = *r.rating;
          if (r.verdict) j["verdict"] = eval::to_string(*r.verdict);
        } else {
          j["code"] = r.code;
          j["message"] = r.message;
        }
      },
      body);
  return j;
}

ResponseBody parse_result(Kind kind, const ordered_json& j) {
  switch (kind) {
    case Kind::handshake:
      return parse_capabilities(j);
    case Kind::logits: {
      const Fields f(j, "logits result");
      f.only({"log_probs"});
      const auto& lp = f.at("log_probs");
      if (!lp.is_array()) throw ProtocolError("logits result: 'log_probs' must be an array");
      LogitsResult r;
      r.log_probs.reserve(lp.size());
      for (const auto& v : lp) {
        if (v.is_null()) {
          r.log_probs.push_back(-std::numeric_limits<double>::infinity());
        } else if (v.is_number()) {
          r.log_probs.push_back(v.get<double>());
        } else {
          throw ProtocolError("logits result: entries must be numbers or null");
        }
      }
      return r;
    }
    case Kind::detector_score: {
      const Fields f(j, "detector_score result");
      f.only({"score"});
      return ScoreResult{f.number("score")};
    }
    case Kind::judge: {
      const Fields f(j, "judge result");
      f.only({"rating", "verdict"});
      JudgeResult r;
      if (f.has("rating")) r.rating = static_cast<int>(f.uint("rating"));
      if (f.has("verdict")) {
        try {
          r.verdict = eval::parse_verdict(f.str("verdict"));
        } catch (const DataError& e) {
          throw ProtocolError(std::string("judge result: ") + e.what());
        }
      }
      if (r.rating.has_value() == r.verdict.has_value()) {
        throw ProtocolError("judge result: exactly one of 'rating' and 'verdict' is required");
      }
      return r;
    }
  }
  throw ProtocolError("unreachable kind");
}

void check_version(const Fields& f) {
  const auto v = f.uint("v");
  if (v != static_cast<std::uint64_t>(kProtocolVersion)) {
    throw ProtocolError("unsupported protocol version " + std::to_string(v));
  }
}

}  // namespace

std::string serialize(const Request& request) {
  ordered_json j;
  j["v"] = kProtocolVersion;
  j["id"] = request.id;
  j["kind"] = to_string(request.kind());
  j["payload"] = payload_json(request.payload);
  return dump(j);
}

std::string serialize(const Response& response) {
  ordered_json j;
  j["v"] = kProtocolVersion;
  j["id"] = response.id;
  j["kind"] = to_string(response.kind);
  j["ok"] = response.ok();
  j[response.ok() ? "result" : "error"] = result_json(response.body);
  return dump(j);
}

Request parse_request(std::string_view line) {
  const auto j = parse_json(line);
  const Fields f(j, "request");
  f.only({"v", "id", "kind", "payload"});
  check_version(f);
  Request r;
  r.id = f.uint("id");
  r.payload = parse_payload(parse_kind(f.str("kind")), f.at("payload"));
  return r;
}

Response parse_response(std::string_view line) {
  const auto j = parse_json(line);
  const Fields f(j, "response");
  f.only({"v", "id", "kind", "ok", "result", "error"});
  check_version(f);
  Response r;
  r.id = f.uint("id");
  r.kind = parse_kind(f.str("kind"));
  if (f.boolean("ok")) {
    if (f.has("error")) throw ProtocolError("response: 'error' present on a successful response");
    r.body = parse_result(r.kind, f.at("result"));
  } else {
    if (f.has("result")) throw ProtocolError("response: 'result' present on an error response");
    const Fields e(f.at("error"), "error");
    e.only({"code", "message"});
    r.body = ErrorInfo{e.str("code"), e.str("message")};
  }
  return r;
}

}  // namespace advpara::bridge
