#include "advpara/detectors/detector_io.hpp"

#include <json.hpp>
#include <sstream>

#include "advpara/detectors/logistic.hpp"
#include "advpara/detectors/watermark_detector.hpp"
#include "advpara/detectors/zero_shot.hpp"
#include "advpara/util/error.hpp"
#include "advpara/util/io.hpp"

namespace advpara::detectors {
namespace {

using json = nlohmann::ordered_json;

std::string hex64(std::uint64_t v) {
  std::ostringstream ss;
  ss << std::hex << v;
  return ss.str();
}

std::uint64_t parse_hex64(const std::string& s) {
  std::size_t used = 0;
  const auto v = std::stoull(s, &used, 16);
  if (used != s.size()) throw DataError("bad hex value: " + s);
  return v;
}

json header(const Detector& d) {
  json j;
  j["format"] = "advpara-detector";
  j["version"] = kDetectorFormatVersion;
  j["kind"] = d.kind();
  j["id"] = d.id();
  return j;
}

void check_lm(const json& j, const std::shared_ptr<const NGramLM>& lm) {
  if (!lm) throw ConfigError("detector '" + j.at("id").get<std::string>() + "' needs a reference model");
  if (parse_hex64(j.at("lm_identity").get<std::string>()) != lm->identity()) {
    throw DataError("detector '" + j.at("id").get<std::string>() + "' was trained against a different model");
  }
}

}  // namespace

std::string serialize_detector(const Detector& detector) {
  json j = header(detector);
  if (const auto* d = dynamic_cast<const LogisticDetector*>(&detector)) {
    j["lm_identity"] = hex64(d->lm().identity());
    j["feature_version"] = kFeatureVersion;
    j["feature_names"] = std::vector<std::string>(kFeatureNames.begin(), kFeatureNames.end());
    j["standardization"] = {{"mean", d->standardizer().mean}, {"scale", d->standardizer().scale}};
    j["weights"] = d->weights();
    const auto& t = d->training();
    j["training"] = {{"epochs", t.epochs},           {"learning_rate", t.learning_rate},
                     {"seed", t.seed},               {"final_loss", t.final_loss},
                     {"separable", t.separable},     {"degenerate_features", t.degenerate_features}};
  } else if (const auto* g = dynamic_cast<const GltrDetector*>(&detector)) {
    j["lm_identity"] = hex64(g->lm().identity());
    j["a"] = g->a();
    j["b"] = g->b();
  } else if (const auto* c = dynamic_cast<const CurvatureDetector*>(&detector)) {
    j["lm_identity"] = hex64(c->lm().identity());
    j["scale"] = c->scale();
  } else if (const auto* w = dynamic_cast<const WatermarkDetector*>(&detector)) {
    j["scheme"] = std::string(watermark::to_string(w->params().scheme));
    j["gamma"] = w->params().gamma;
    j["delta"] = w->params().delta;
    j["key"] = w->params().key;
    j["vocab_size"] = w->vocab_size();
    j["vocab_hash"] = hex64(w->vocab_hash());
  } else {
    throw ConfigError("detector kind '" + detector.kind() + "' cannot be serialized");
  }
  return j.dump(2) + "\n";
}

std::unique_ptr<Detector> parse_detector(const std::string& text, std::shared_ptr<const NGramLM> lm) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("detector file is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("format") != "advpara-detector") throw DataError("not a detector file");
    if (j.at("version").get<int>() != kDetectorFormatVersion) throw DataError("unsupported detector file version");
    const auto kind = j.at("kind").get<std::string>();
    const auto id = j.at("id").get<std::string>();
    if (kind == "logistic") {
      check_lm(j, lm);
      if (j.at("feature_version").get<int>() != kFeatureVersion) throw DataError("feature version mismatch");
      Standardizer s;
      s.mean = j.at("standardization").at("mean").get<std::vector<double>>();
      s.scale = j.at("standardization").at("scale").get<std::vector<double>>();
      s.degenerate.assign(s.mean.size(), false);
      const auto& t = j.at("training");
      TrainingInfo info{t.at("epochs").get<std::size_t>(),    t.at("learning_rate").get<double>(),
                        t.at("seed").get<std::uint64_t>(),    t.at("final_loss").get<double>(),
                        t.at("separable").get<bool>(),        t.at("degenerate_features").get<bool>()};
      return std::make_unique<LogisticDetector>(id, lm, std::move(s), j.at("weights").get<std::vector<double>>(),
                                                info);
    }
    if (kind == "gltr") {
      check_lm(j, lm);
      return std::make_unique<GltrDetector>(id, lm, j.at("a").get<double>(), j.at("b").get<double>());
    }
    if (kind == "curvature") {
      check_lm(j, lm);
      return std::make_unique<CurvatureDetector>(id, lm, j.at("scale").get<double>());
    }
    if (kind == "watermark") {
      watermark::WatermarkParams p;
      p.scheme = watermark::parse_scheme(j.at("scheme").get<std::string>());
      p.gamma = j.at("gamma").get<double>();
      p.delta = j.at("delta").get<double>();
      p.key = j.at("key").get<std::uint64_t>();
      return std::make_unique<WatermarkDetector>(id, p, j.at("vocab_size").get<std::size_t>(),
                                                 parse_hex64(j.at("vocab_hash").get<std::string>()));
    }
    throw DataError("unknown detector kind: " + kind);
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed detector file: ") + e.what());
  }
}

void save_detector(const Detector& detector, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_detector(detector));
}

std::unique_ptr<Detector> load_detector(const std::filesystem::path& path, std::shared_ptr<const NGramLM> lm) {
  return parse_detector(read_file(path), std::move(lm));
}

}  // namespace advpara::detectors
