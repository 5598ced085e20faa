#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "advpara/data/dataset.hpp"
#include "advpara/lm/paraphraser.hpp"
#include "advpara/sampling/sampling.hpp"

namespace advpara::cli {

struct Globals {
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

struct ModelOptions {
  std::string lm;
  std::string vocab;
};

struct SamplingOptions {
  double top_p = SamplingConfig::kDefaultTopP;
  std::size_t top_k = SamplingConfig::kDefaultTopK;
  double temperature = 1.0;
};

struct SynthOptions {
  std::string out_dir;
  std::size_t train_size = 300;
  std::size_t eval_size = 200;
  std::size_t lm_docs = 2000;
};

struct TrainLmOptions {
  std::string corpus;
  std::string format = "auto";
  std::size_t order = 3;
  double add_k = 0.001;
  std::size_t min_count = 1;
  std::string out;
  std::string vocab_out;
};

struct TrainDetectorOptions {
  std::string kind;
  std::string train;
  ModelOptions models;
  std::string id;
  std::size_t epochs = 500;
  double learning_rate = 0.5;
  double l2 = 0.0;
  std::size_t train_prefixes = 2;
  double scale = 1.0;
  double gamma = 0.25;
  double delta = 2.0;
  std::uint64_t key = 0;
  std::string out;
};

struct BuildWmOptions {
  std::string sources;
  std::string format = "auto";
  ModelOptions models;
  SamplingOptions sampling;
  std::string scheme = "kgw";
  double gamma = 0.25;
  double delta = 2.0;
  std::uint64_t key = 0;
  std::size_t prefix_words = 20;
  std::size_t min_len = 200;
  std::size_t max_len = 600;
  std::string out;
};

struct AttackOptions {
  std::string mode;
  std::string input;
  std::string format = "auto";
  ModelOptions models;
  SamplingOptions sampling;
  std::string guidance;
  std::string bridge;
  std::string bridge_detector;
  std::size_t depth = 1;
  double cache_weight = ParaphraserConfig{}.cache_weight;
  double eos_ramp = ParaphraserConfig{}.eos_ramp;
  std::string system_tag;
  std::optional<std::size_t> max_output_tokens;
  std::size_t candidate_threads = 1;
  std::string out;
  std::string trace_out;
};

struct DetectOptions {
  std::vector<std::string> detectors;
  std::string input;
  std::string format = "auto";
  ModelOptions models;
  std::string out;
};

struct EvalOptions {
  std::vector<std::string> detectors;
  ModelOptions models;
  std::string human;
  std::vector<std::string> runs;
  std::string originals;
  std::string out_dir;
};

struct SchemaOptions {
  std::string input;
};

struct TraceCheckOptions {
  std::string input;
};

int cmd_synth_corpus(const Globals& g, const SynthOptions& o, std::ostream& out);
int cmd_train_lm(const Globals& g, const TrainLmOptions& o, std::ostream& out);
int cmd_train_detector(const Globals& g, const TrainDetectorOptions& o, std::ostream& out);
int cmd_build_wm_dataset(const Globals& g, const BuildWmOptions& o, std::ostream& out);
int cmd_attack(const Globals& g, const AttackOptions& o, std::ostream& out);
int cmd_detect(const Globals& g, const DetectOptions& o, std::ostream& out);
int cmd_eval(const Globals& g, const EvalOptions& o, std::ostream& out);
int cmd_validate_schema(const Globals& g, const SchemaOptions& o, std::ostream& out);
int cmd_trace_check(const Globals& g, const TraceCheckOptions& o, std::ostream& out);

// "auto" picks jsonl for *.jsonl paths and lines otherwise.
data::Format resolve_format(const std::string& path, const std::string& format);

}  // namespace advpara::cli
