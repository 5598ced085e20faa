#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "advpara/eval/quality.hpp"
#include "advpara/text/vocabulary.hpp"
#include "advpara/util/error.hpp"

namespace advpara::bridge {

inline constexpr int kProtocolVersion = 1;

// A message that does not follow the wire format.
class ProtocolError : public DataError {
 public:
  using DataError::DataError;
};

enum class Kind { handshake, logits, detector_score, judge };

std::string_view to_string(Kind kind);
Kind parse_kind(std::string_view name);

// Which end of [0, 1] a backend detector reserves for AI text.
enum class Orientation { higher_is_ai, lower_is_ai };

std::string_view to_string(Orientation o);
Orientation parse_orientation(std::string_view name);

// Who turns text into ids for logits calls.
enum class Tokenization { core, bridge };

std::string_view to_string(Tokenization t);
Tokenization parse_tokenization(std::string_view name);

struct HandshakeRequest {
  std::string client = "advpara";
  int protocol = kProtocolVersion;
  bool operator==(const HandshakeRequest&) const = default;
};

/// Core tokenization sends `source` ids; bridge tokenization sends
/// `source_text` and works on ids the bridge issued.
struct LogitsRequest {
  std::string system_tag;
  std::optional<TokenSequence> source;
  std::optional<std::string> source_text;
  TokenSequence prefix;
  bool operator==(const LogitsRequest&) const = default;
};

struct DetectorRequest {
  std::string detector;
  std::string text;
  bool operator==(const DetectorRequest&) const = default;
};

// With a rival the judge returns a verdict for `paraphrase`, else a rating.
struct JudgeRequest {
  std::string judge;
  std::string original;
  std::string paraphrase;
  std::optional<std::string> rival;
  bool operator==(const JudgeRequest&) const = default;
};

using RequestPayload = std::variant<HandshakeRequest, LogitsRequest, DetectorRequest, JudgeRequest>;

struct Request {
  std::uint64_t id = 0;
  RequestPayload payload;
  Kind kind() const;
  bool operator==(const Request&) const = default;
};

struct DetectorInfo {
  std::string id;
  Orientation orientation = Orientation::higher_is_ai;
  std::size_t min_length = 1;
  bool operator==(const DetectorInfo&) const = default;
};

/// Handshake reply. Every listed detector must declare its orientation;
/// parsing rejects a detector entry without one.
struct Capabilities {
  int protocol = kProtocolVersion;
  Tokenization tokenization = Tokenization::core;
  std::size_t vocab_size = 0;
  std::size_t max_context = 0;
  bool logits = false;
  bool detector_score = false;
  bool judge = false;
  std::vector<DetectorInfo> detectors;
  std::vector<std::string> judges;

  const DetectorInfo* find_detector(std::string_view id) const;
  bool operator==(const Capabilities&) const = default;
};

// -inf entries travel as null.
struct LogitsResult {
  std::vector<double> log_probs;
  bool operator==(const LogitsResult&) const = default;
};

struct ScoreResult {
  double score = 0.0;
  bool operator==(const ScoreResult&) const = default;
};

struct JudgeResult {
  std::optional<int> rating;
  std::optional<eval::Verdict> verdict;
  bool operator==(const JudgeResult&) const = default;
};

struct ErrorInfo {
  std::string code;
  std::string message;
  bool operator==(const ErrorInfo&) const = default;
};

using ResponseBody = std::variant<Capabilities, LogitsResult, ScoreResult, JudgeResult, ErrorInfo>;

struct Response {
  std::uint64_t id = 0;
  Kind kind = Kind::handshake;
  ResponseBody body;
  bool ok() const { return !std::holds_alternative<ErrorInfo>(body); }
  bool operator==(const Response&) const = default;
};

// Error codes carried in ErrorInfo::code.
inline constexpr std::string_view kErrBadRequest = "bad_request";
inline constexpr std::string_view kErrUnsupported = "unsupported";
inline constexpr std::string_view kErrModel = "model_error";
inline constexpr std::string_view kErrVersion = "protocol_version";

/// One JSON object per line, no trailing newline. parse(serialize(m)) == m
/// and serialize(parse(line)) == line for canonical lines.
std::string serialize(const Request& request);
std::string serialize(const Response& response);
Request parse_request(std::string_view line);
Response parse_response(std::string_view line);

}  // namespace advpara::bridge
