#include <algorithm>

#include <json.hpp>

#include "advpara/attack/attack.hpp"
#include "advpara/util/io.hpp"

namespace advpara::attack {
namespace {

template <typename T, typename Fn>
void append_array(std::string& out, const std::vector<T>& values, Fn&& fmt) {
  out += '[';
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += fmt(values[i]);
  }
  out += ']';
}

}  // namespace

std::string trace_to_jsonl(const AttackTrace& trace, std::string_view record_id) {
  std::string out;
  const std::string rid = nlohmann::json(std::string(record_id)).dump();
  const std::string gid = nlohmann::json(trace.guidance_id).dump();
  const char* mode = trace.input_mode == detectors::InputMode::text ? "text" : "tokens";
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const AttackStep& s = trace.steps[i];
    out += "{\"record\":" + rid + ",\"step\":" + std::to_string(i) + ",\"guidance\":" + gid + ",\"input\":\"" +
           mode + "\",\"candidates\":";
    append_array(out, s.candidates, [](TokenId t) { return std::to_string(t); });
    out += ",\"probs\":";
    append_array(out, s.probs, [](double p) { return format_fixed(p, 9); });
    out += ",\"scores\":";
    append_array(out, s.scores, [](const detectors::DetectorScore& d) { return format_fixed(d.value, 9); });
    out += ",\"chosen\":" + std::to_string(s.chosen) + ",\"tie_break\":\"" + std::string(to_string(s.tie_break)) +
           "\"";
    if (i + 1 == trace.steps.size()) out += std::string(",\"truncated\":") + (trace.truncated ? "true" : "false");
    out += "}\n";
  }
  return out;
}

std::vector<TraceFileStep> parse_trace_jsonl(std::string_view text) {
  std::vector<TraceFileStep> steps;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      TraceFileStep s;
      s.record_id = j.at("record").get<std::string>();
      s.step = j.at("step").get<std::size_t>();
      s.candidates = j.at("candidates").get<std::vector<TokenId>>();
      s.probs = j.at("probs").get<std::vector<double>>();
      s.scores = j.at("scores").get<std::vector<double>>();
      s.chosen = j.at("chosen").get<TokenId>();
      s.tie_break = parse_tie_break(j.at("tie_break").get<std::string>());
      steps.push_back(std::move(s));
    } catch (const nlohmann::json::exception& e) {
      throw DataError("trace line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return steps;
}

std::optional<TraceViolation> check_trace_file(const std::vector<TraceFileStep>& steps) {
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const auto& s = steps[i];
    if (s.candidates.empty() || s.candidates.size() != s.scores.size() || s.probs.size() != s.scores.size()) {
      return TraceViolation{i, "malformed step (record " + s.record_id + ")"};
    }
    const auto it = std::find(s.candidates.begin(), s.candidates.end(), s.chosen);
    if (it == s.candidates.end()) return TraceViolation{i, "chosen token is not a candidate (record " + s.record_id + ")"};
    const double chosen = s.scores[static_cast<std::size_t>(it - s.candidates.begin())];
    const double min = *std::min_element(s.scores.begin(), s.scores.end());
    if (chosen != min) return TraceViolation{i, "chosen score is not the minimum (record " + s.record_id + ")"};
    const auto ties = std::count(s.scores.begin(), s.scores.end(), min);
    if (s.tie_break != TieBreak::score && ties < 2) {
      return TraceViolation{i, "tie-break tag without a tie (record " + s.record_id + ")"};
    }
    if (i > 0 && steps[i - 1].record_id == s.record_id && steps[i - 1].step + 1 != s.step) {
      return TraceViolation{i, "non-consecutive step index (record " + s.record_id + ")"};
    }
  }
  return std::nullopt;
}

}  // namespace advpara::attack
