#include "cli/cli.hpp"

#include <cstdlib>
#include <exception>
#include <ostream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "cli/commands.hpp"
#include "advpara/util/error.hpp"

namespace advpara::cli {

namespace {

void setup_logging() {
  auto logger = spdlog::get("advpara");
  if (!logger) {
    logger = spdlog::stderr_color_mt("advpara");
    logger->set_pattern("[%l] %v");
    spdlog::set_default_logger(logger);
  }
  spdlog::level::level_enum level = spdlog::level::info;
  if (const char* env = std::getenv("ADVPARA_LOG"); env && *env) {
    level = spdlog::level::from_str(env);
    // from_str maps unknown names to off; only "off" itself should silence.
    if (level == spdlog::level::off && std::string_view(env) != "off") level = spdlog::level::info;
  }
  spdlog::set_level(level);
}

void add_sampling(CLI::App& app, SamplingOptions& s) {
  app.add_option("--top-p", s.top_p, "Nucleus mass")->capture_default_str();
  app.add_option("--top-k", s.top_k, "Candidate cap")->capture_default_str();
  app.add_option("--temperature", s.temperature, "Sampling temperature")->capture_default_str();
}

void add_models(CLI::App& app, ModelOptions& m, bool required) {
  auto* lm = app.add_option("--lm", m.lm, "N-gram model file")->check(CLI::ExistingFile);
  auto* vocab = app.add_option("--vocab", m.vocab, "Vocabulary file")->check(CLI::ExistingFile);
  if (required) {
    lm->required();
    vocab->required();
  }
}

void add_dataset(CLI::App& app, std::string& path, std::string& format, const char* name, const char* help) {
  app.add_option(name, path, help)->required()->check(CLI::ExistingFile);
  app.add_option("--format", format, "Input format: auto, jsonl or lines")
      ->check(CLI::IsMember({"auto", "jsonl", "lines"}))
      ->capture_default_str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out) {
  setup_logging();
  CLI::App app{"Detector-guided adversarial paraphrasing lab", args.empty() ? "advpara" : args.front()};
  app.set_config("--config", "", "Run config file (key = value lines; [subcommand] sections)");
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--seed", g.seed, "Global seed")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads across records")->check(CLI::PositiveNumber)->capture_default_str();

  SynthOptions synth;
  auto* c_synth = app.add_subcommand("synth-corpus", "Write a synthetic lab corpus (LM corpus, train and eval splits)");
  c_synth->add_option("--out-dir", synth.out_dir, "Output directory")->required();
  c_synth->add_option("--train-size", synth.train_size)->capture_default_str();
  c_synth->add_option("--eval-size", synth.eval_size)->capture_default_str();
  c_synth->add_option("--lm-docs", synth.lm_docs)->capture_default_str();

  TrainLmOptions tlm;
  auto* c_tlm = app.add_subcommand("train-lm", "Train the n-gram model and vocabulary");
  add_dataset(*c_tlm, tlm.corpus, tlm.format, "--corpus", "Training corpus");
  c_tlm->add_option("--order", tlm.order)->check(CLI::PositiveNumber)->capture_default_str();
  c_tlm->add_option("--add-k", tlm.add_k)->check(CLI::NonNegativeNumber)->capture_default_str();
  c_tlm->add_option("--min-count", tlm.min_count)->check(CLI::PositiveNumber)->capture_default_str();
  c_tlm->add_option("--out", tlm.out, "Model file")->required();
  c_tlm->add_option("--vocab-out", tlm.vocab_out, "Vocabulary file (default: <out>.vocab)");

  TrainDetectorOptions tdet;
  auto* c_tdet = app.add_subcommand("train-detector", "Train or configure a detector and write its file");
  c_tdet->add_option("--kind", tdet.kind)
      ->required()
      ->check(CLI::IsMember({"logistic", "gltr", "curvature", "kgw", "unigram"}));
  c_tdet->add_option("--train", tdet.train, "Labelled dataset (logistic, gltr)")->check(CLI::ExistingFile);
  add_models(*c_tdet, tdet.models, true);
  c_tdet->add_option("--id", tdet.id, "Detector id (default: the kind)");
  c_tdet->add_option("--epochs", tdet.epochs)->capture_default_str();
  c_tdet->add_option("--learning-rate", tdet.learning_rate)->capture_default_str();
  c_tdet->add_option("--l2", tdet.l2)->capture_default_str();
  c_tdet->add_option("--train-prefixes", tdet.train_prefixes, "Random prefixes added per training text (logistic)")
      ->capture_default_str();
  c_tdet->add_option("--scale", tdet.scale, "Curvature score scale")->capture_default_str();
  c_tdet->add_option("--gamma", tdet.gamma)->capture_default_str();
  c_tdet->add_option("--delta", tdet.delta)->capture_default_str();
  c_tdet->add_option("--key", tdet.key, "Watermark key")->capture_default_str();
  c_tdet->add_option("--out", tdet.out, "Detector file")->required();

  BuildWmOptions bwm;
  auto* c_bwm = app.add_subcommand("build-wm-dataset", "Generate watermarked continuations of source texts");
  add_dataset(*c_bwm, bwm.sources, bwm.format, "--sources", "Source dataset (prefixes come from here)");
  add_models(*c_bwm, bwm.models, true);
  add_sampling(*c_bwm, bwm.sampling);
  c_bwm->add_option("--scheme", bwm.scheme)->check(CLI::IsMember({"kgw", "unigram"}))->capture_default_str();
  c_bwm->add_option("--gamma", bwm.gamma)->capture_default_str();
  c_bwm->add_option("--delta", bwm.delta)->capture_default_str();
  c_bwm->add_option("--key", bwm.key)->capture_default_str();
  c_bwm->add_option("--prefix-words", bwm.prefix_words)->capture_default_str();
  c_bwm->add_option("--min-len", bwm.min_len)->capture_default_str();
  c_bwm->add_option("--max-len", bwm.max_len)->capture_default_str();
  c_bwm->add_option("--out", bwm.out, "Output dataset")->required();

  AttackOptions att;
  auto* c_att = app.add_subcommand("attack", "Paraphrase a dataset (simple, recursive or adversarial)");
  c_att->add_option("--mode", att.mode)->required()->check(CLI::IsMember({"simple", "recursive", "adversarial"}));
  add_dataset(*c_att, att.input, att.format, "--input", "Dataset to paraphrase");
  add_models(*c_att, att.models, true);
  add_sampling(*c_att, att.sampling);
  c_att->add_option("--guidance", att.guidance, "Guidance detector file (adversarial)")->check(CLI::ExistingFile);
  c_att->add_option("--bridge", att.bridge, "Command of a bridge backend serving the guidance detector");
  c_att->add_option("--bridge-detector", att.bridge_detector, "Detector id on the bridge");
  c_att->add_option("--depth", att.depth, "Recursive passes")->check(CLI::PositiveNumber)->capture_default_str();
  c_att->add_option("--cache-weight", att.cache_weight)->capture_default_str();
  c_att->add_option("--eos-ramp", att.eos_ramp)->capture_default_str();
  c_att->add_option("--system-tag", att.system_tag);
  c_att->add_option("--max-output-tokens", att.max_output_tokens, "Output cap (default 2|x| + 64)");
  c_att->add_option("--candidate-threads", att.candidate_threads, "Workers scoring one step's candidates")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  c_att->add_option("--out", att.out, "Output dataset")->required();
  c_att->add_option("--trace-out", att.trace_out, "Trace file (default: <out>.trace.jsonl)");

  DetectOptions det;
  auto* c_det = app.add_subcommand("detect", "Score a dataset with one or more detectors");
  c_det->add_option("--detector", det.detectors, "Detector file (repeatable)")->required()->check(CLI::ExistingFile);
  add_dataset(*c_det, det.input, det.format, "--input", "Dataset to score");
  add_models(*c_det, det.models, true);
  c_det->add_option("--out", det.out, "Scores JSONL")->required();

  EvalOptions ev;
  auto* c_ev = app.add_subcommand("eval", "ROC, metrics, transfer matrix, perplexity and quality reports");
  c_ev->add_option("--detector", ev.detectors, "Deployed detector file (repeatable)")
      ->required()
      ->check(CLI::ExistingFile);
  add_models(*c_ev, ev.models, true);
  c_ev->add_option("--human", ev.human, "Human dataset (ROC negatives)")->required()->check(CLI::ExistingFile);
  c_ev->add_option("--run", ev.runs, "name=path of an AI dataset (repeatable); 'none' is the no-attack run")
      ->required();
  c_ev->add_option("--originals", ev.originals, "Unattacked AI texts, for quality judging")
      ->check(CLI::ExistingFile);
  c_ev->add_option("--out-dir", ev.out_dir, "Report directory")->required();

  SchemaOptions sch;
  auto* c_sch = app.add_subcommand("validate-schema", "Check a dataset file against the JSONL schema");
  c_sch->add_option("--input", sch.input)->required()->check(CLI::ExistingFile);

  TraceCheckOptions tc;
  auto* c_tc = app.add_subcommand("trace-check", "Verify per-step optimality of an attack trace file");
  c_tc->add_option("--input", tc.input)->required()->check(CLI::ExistingFile);

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    spdlog::error("{}", e.what());
    return kExitConfig;
  }

  try {
    if (*c_synth) return cmd_synth_corpus(g, synth, out);
    if (*c_tlm) return cmd_train_lm(g, tlm, out);
    if (*c_tdet) return cmd_train_detector(g, tdet, out);
    if (*c_bwm) return cmd_build_wm_dataset(g, bwm, out);
    if (*c_att) return cmd_attack(g, att, out);
    if (*c_det) return cmd_detect(g, det, out);
    if (*c_ev) return cmd_eval(g, ev, out);
    if (*c_sch) return cmd_validate_schema(g, sch, out);
    if (*c_tc) return cmd_trace_check(g, tc, out);
  } catch (const ConfigError& e) {
    spdlog::error("config error: {}", e.what());
    return kExitConfig;
  } catch (const DataError& e) {
    spdlog::error("data error: {}", e.what());
    return kExitData;
  } catch (const std::exception& e) {
    spdlog::error("internal error: {}", e.what());
    return kExitInternal;
  }
  return kExitInternal;
}

}  // namespace advpara::cli
