#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "advpara/bridge/protocol.hpp"
#include "advpara/detectors/detector.hpp"
#include "advpara/eval/quality.hpp"
#include "advpara/lm/conditional_lm.hpp"

namespace advpara::bridge {

/// Server side of the protocol over native components: the echo fixture
/// that lets the core talk to itself through the wire format. Detector
/// requests carry text, which is re-encoded with `vocab`.
class LocalBackend {
 public:
  explicit LocalBackend(std::shared_ptr<const Vocabulary> vocab);

  void set_lm(std::shared_ptr<const ConditionalLM> lm, std::size_t max_context);
  // A lower_is_ai detector answers 1 - s for the native score s.
  void add_detector(std::shared_ptr<const detectors::Detector> detector,
                    Orientation orientation = Orientation::higher_is_ai);
  void add_judge(std::shared_ptr<const eval::Judge> judge);

  Capabilities capabilities() const;

  /// Answers one request line. Never throws: malformed requests and model
  /// failures become error responses carrying the request's id when it
  /// could be read (0 otherwise).
  std::string handle(std::string_view line) const;

  // Answers every line of `in` on `out` until end of input.
  void serve(std::istream& in, std::ostream& out) const;

 private:
  struct DetectorEntry {
    std::shared_ptr<const detectors::Detector> detector;
    Orientation orientation;
  };

  Response answer(const Request& request) const;

  std::shared_ptr<const Vocabulary> vocab_;
  std::shared_ptr<const ConditionalLM> lm_;
  std::size_t max_context_ = 0;
  std::vector<DetectorEntry> detectors_;
  std::vector<std::shared_ptr<const eval::Judge>> judges_;
};

}  // namespace advpara::bridge
