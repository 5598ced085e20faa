#include "cli/commands.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <ostream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "advpara/attack/attack.hpp"
#include "advpara/bridge/client.hpp"
#include "advpara/detectors/detector_io.hpp"
#include "advpara/detectors/logistic.hpp"
#include "advpara/detectors/watermark_detector.hpp"
#include "advpara/detectors/zero_shot.hpp"
#include "advpara/eval/quality.hpp"
#include "advpara/eval/roc.hpp"
#include "advpara/eval/stats.hpp"
#include "advpara/eval/transfer.hpp"
#include "advpara/lm/paraphraser.hpp"
#include "advpara/synth/lab.hpp"
#include "advpara/util/io.hpp"
#include "advpara/util/parallel.hpp"
#include "cli/cli.hpp"

namespace advpara::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

data::Format resolve_format(const std::string& path, const std::string& format) {
  if (format == "auto") return fs::path(path).extension() == ".jsonl" ? data::Format::jsonl : data::Format::lines;
  return data::parse_format(format);
}

namespace {

struct Models {
  std::shared_ptr<const Vocabulary> vocab;
  std::shared_ptr<const NGramLM> lm;
};

Models load_models(const ModelOptions& o) {
  Models m;
  m.vocab = std::make_shared<Vocabulary>(Vocabulary::load(o.vocab));
  m.lm = std::make_shared<NGramLM>(NGramLM::load(o.lm));
  if (m.lm->vocab_hash() != m.vocab->hash() || m.lm->vocab_size() != m.vocab->size()) {
    throw DataError("model " + o.lm + " was not trained with vocabulary " + o.vocab);
  }
  return m;
}

std::vector<data::Record> load_records(const std::string& path, const std::string& format) {
  return data::load_dataset(path, resolve_format(path, format));
}

std::shared_ptr<const detectors::Detector> load_detector(const std::string& path, const Models& m) {
  std::shared_ptr<const detectors::Detector> d = detectors::load_detector(path, m.lm);
  if (const auto* w = dynamic_cast<const detectors::WatermarkDetector*>(d.get())) {
    if (w->vocab_hash() != m.vocab->hash()) {
      throw DataError("watermark detector " + path + " belongs to a different vocabulary");
    }
  }
  return d;
}

void ensure_parent(const std::string& path) {
  const auto parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

std::string seed_hex(std::uint64_t seed) { return data::hex64(seed); }

std::vector<std::string> split_command(const std::string& cmd) {
  std::istringstream in(cmd);
  std::vector<std::string> out;
  for (std::string part; in >> part;) out.push_back(part);
  return out;
}

SamplingConfig sampling_config(const SamplingOptions& s, std::uint64_t seed) {
  return SamplingConfig(s.top_p, s.top_k, s.temperature, seed);
}

double mean_perplexity(const NGramLM& lm, const Vocabulary& vocab, const std::vector<data::Record>& records) {
  std::vector<double> values;
  for (const auto& r : records) {
    TokenSequence seq = encode(vocab, r.text);
    seq.push_back(vocab.eos_id());
    values.push_back(perplexity(lm, {}, seq));
  }
  return values.empty() ? 0.0 : eval::mean(values);
}

}  // namespace

int cmd_synth_corpus(const Globals& g, const SynthOptions& o, std::ostream& out) {
  synth::LabConfig cfg;
  cfg.seed = g.seed;
  cfg.train_size = o.train_size;
  cfg.eval_size = o.eval_size;
  cfg.lm_docs = o.lm_docs;
  cfg.threads = g.threads;
  const synth::Lab lab = synth::build_lab(cfg);

  const synth::World world(cfg.world);
  std::vector<data::Record> corpus;
  const auto docs = world.documents(cfg.lm_docs, "lm-corpus");
  for (std::size_t i = 0; i < docs.size(); ++i) {
    data::Record r;
    r.id = "lm-" + std::to_string(i);
    r.text = docs[i];
    r.label = data::Label::human;
    corpus.push_back(std::move(r));
  }
  auto stamp = [&](std::vector<data::Record> records) {
    for (auto& r : records) r.meta["seed"] = seed_hex(g.seed);
    return records;
  };
  std::vector<data::Record> train = lab.train_ai;
  train.insert(train.end(), lab.train_human.begin(), lab.train_human.end());

  fs::create_directories(o.out_dir);
  const fs::path dir(o.out_dir);
  data::save_dataset(dir / "lm_corpus.jsonl", stamp(corpus));
  data::save_dataset(dir / "train.jsonl", stamp(train));
  data::save_dataset(dir / "eval_ai.jsonl", stamp(lab.eval_ai));
  data::save_dataset(dir / "eval_human.jsonl", stamp(lab.eval_human));
  out << fmt::format("wrote {} LM documents, {} training texts, {} + {} evaluation texts to {}\n", corpus.size(),
                     train.size(), lab.eval_ai.size(), lab.eval_human.size(), o.out_dir);
  return kExitOk;
}

int cmd_train_lm(const Globals&, const TrainLmOptions& o, std::ostream& out) {
  const auto records = load_records(o.corpus, o.format);
  if (records.empty()) throw DataError("corpus " + o.corpus + " is empty");
  std::vector<std::string> texts;
  for (const auto& r : records) texts.push_back(r.text);
  const Vocabulary vocab = build_vocab(texts, o.min_count);
  std::vector<TokenSequence> encoded;
  std::size_t tokens = 0;
  for (const auto& t : texts) {
    encoded.push_back(encode(vocab, t));
    tokens += encoded.back().size();
  }
  const NGramLM lm = train_lm(encoded, vocab, o.order, o.add_k);
  const std::string vocab_out = o.vocab_out.empty() ? o.out + ".vocab" : o.vocab_out;
  ensure_parent(o.out);
  ensure_parent(vocab_out);
  vocab.save(vocab_out);
  lm.save(o.out);
  out << fmt::format("documents {} tokens {} vocabulary {} order {} add_k {} identity {}\n", records.size(), tokens,
                     vocab.size(), o.order, format_double(o.add_k), data::hex64(lm.identity()));
  return kExitOk;
}

int cmd_train_detector(const Globals& g, const TrainDetectorOptions& o, std::ostream& out) {
  const Models m = load_models(o.models);
  const std::string id = o.id.empty() ? o.kind : o.id;
  std::unique_ptr<detectors::Detector> detector;
  if (o.kind == "logistic" || o.kind == "gltr") {
    if (o.train.empty()) throw ConfigError("--train is required for " + o.kind);
    std::vector<TokenSequence> ai;
    std::vector<TokenSequence> human;
    for (const auto& r : data::load_dataset(o.train)) {
      (r.label == data::Label::ai ? ai : human).push_back(encode(*m.vocab, r.text));
    }
    if (ai.empty() || human.empty()) throw DataError("training set " + o.train + " needs both ai and human texts");
    detectors::LogisticHyperparams hp;
    hp.epochs = o.epochs;
    hp.learning_rate = o.learning_rate;
    hp.l2 = o.l2;
    hp.seed = g.seed;
    if (o.kind == "logistic") {
      const std::size_t min_len = detectors::LogisticDetector::kMinLength;
      const auto ai_aug = synth::with_prefixes(ai, o.train_prefixes, min_len, g.seed, "prefix-ai");
      const auto human_aug = synth::with_prefixes(human, o.train_prefixes, min_len, g.seed, "prefix-human");
      auto d = std::make_unique<detectors::LogisticDetector>(detectors::train_logistic(ai_aug, human_aug, m.lm, hp, id));
      out << fmt::format("trained {} on {} ai / {} human sequences: final loss {} separable {}\n", id, ai_aug.size(),
                         human_aug.size(), format_fixed(d->training().final_loss, 6), d->training().separable);
      detector = std::move(d);
    } else {
      auto d = std::make_unique<detectors::GltrDetector>(detectors::calibrate_gltr(ai, human, m.lm, hp, id));
      out << fmt::format("calibrated {}: a {} b {}\n", id, format_fixed(d->a(), 6), format_fixed(d->b(), 6));
      detector = std::move(d);
    }
  } else if (o.kind == "curvature") {
    detector = std::make_unique<detectors::CurvatureDetector>(id, m.lm, o.scale);
  } else {
    watermark::WatermarkParams p;
    p.scheme = watermark::parse_scheme(o.kind);
    p.gamma = o.gamma;
    p.delta = o.delta;
    p.key = o.key;
    p.validate();
    detector = std::make_unique<detectors::WatermarkDetector>(id, p, m.vocab->size(), m.vocab->hash());
  }
  ensure_parent(o.out);
  detectors::save_detector(*detector, o.out);
  out << fmt::format("wrote {} detector '{}' to {}\n", detector->kind(), id, o.out);
  return kExitOk;
}

int cmd_build_wm_dataset(const Globals& g, const BuildWmOptions& o, std::ostream& out) {
  const Models m = load_models(o.models);
  const auto sources = load_records(o.sources, o.format);
  data::WatermarkBuildOptions opts;
  opts.params.scheme = watermark::parse_scheme(o.scheme);
  opts.params.gamma = o.gamma;
  opts.params.delta = o.delta;
  opts.params.key = o.key;
  opts.sampling = sampling_config(o.sampling, g.seed);
  opts.prefix_words = o.prefix_words;
  opts.limits = {o.min_len, o.max_len};
  opts.threads = g.threads;
  const auto result = data::build_watermarked_dataset(sources, *m.lm, *m.vocab, opts);
  for (const auto& f : result.failures) spdlog::warn("record {}: {}", f.id, f.message);
  ensure_parent(o.out);
  data::save_dataset(o.out, result.records);
  out << fmt::format("generated {} watermarked records ({} sources too short, {} failures)\n", result.records.size(),
                     result.dropped_short, result.failures.size());
  return kExitOk;
}

int cmd_attack(const Globals& g, const AttackOptions& o, std::ostream& out) {
  const Models m = load_models(o.models);
  const auto records = load_records(o.input, o.format);

  ParaphraserConfig pcfg;
  pcfg.system_tag = o.system_tag;
  pcfg.cache_weight = o.cache_weight;
  pcfg.ngram_order = m.lm->order();
  pcfg.eos_ramp = o.eos_ramp;
  const CacheParaphraser paraphraser(m.lm, pcfg);

  std::shared_ptr<const detectors::Detector> guidance;
  if (o.mode == "adversarial") {
    if (!o.guidance.empty() == !o.bridge.empty()) {
      throw ConfigError("adversarial mode needs exactly one of --guidance and --bridge");
    }
    if (!o.guidance.empty()) {
      guidance = load_detector(o.guidance, m);
    } else {
      if (o.bridge_detector.empty()) throw ConfigError("--bridge needs --bridge-detector");
      auto client = std::make_shared<bridge::BridgeClient>(
          std::make_unique<bridge::ProcessTransport>(split_command(o.bridge)));
      guidance = std::make_shared<bridge::BridgeDetector>(client, o.bridge_detector, m.vocab);
    }
  } else if (!o.guidance.empty() || !o.bridge.empty()) {
    spdlog::warn("--guidance and --bridge are ignored in {} mode", o.mode);
  }

  attack::AttackConfig base;
  base.sampling = sampling_config(o.sampling, g.seed);
  base.max_output_tokens = o.max_output_tokens;
  base.recursion_depth = o.depth;
  base.threads = o.candidate_threads;
  base.validate();

  out << fmt::format("config: mode={} top_p={} top_k={} temperature={} cache_weight={} eos_ramp={} depth={} seed={} "
                     "guidance={}\n",
                     o.mode, format_double(base.sampling.top_p()), base.sampling.top_k(),
                     format_double(base.sampling.temperature()), format_double(pcfg.cache_weight),
                     format_double(pcfg.eos_ramp), o.depth, g.seed, guidance ? guidance->id() : "none");

  struct Outcome {
    std::optional<data::Record> record;
    std::string trace;
    std::string error;
  };
  std::vector<Outcome> outcomes(records.size());
  parallel_for(records.size(), g.threads, [&](std::size_t i) {
    const auto& src = records[i];
    Outcome& res = outcomes[i];
    try {
      attack::AttackConfig cfg = base;
      const std::uint64_t seed = derive_seed(g.seed, "attack", src.id);
      cfg.sampling = base.sampling.with_seed(seed);
      const TokenSequence source = encode(*m.vocab, src.text);
      if (source.empty()) throw DataError("empty text");
      TokenSequence output;
      bool truncated = false;
      if (o.mode == "simple") {
        output = attack::simple_paraphrase(paraphraser, source, cfg);
      } else if (o.mode == "recursive") {
        output = attack::recursive_paraphrase(paraphraser, source, cfg, o.depth).output;
      } else {
        const auto trace = attack::adversarial_paraphrase(paraphraser, *guidance, source, cfg);
        output = trace.output;
        truncated = trace.truncated;
        res.trace = attack::trace_to_jsonl(trace, src.id);
      }
      output = attack::without_eos(output, m.vocab->eos_id());
      data::Record r;
      r.id = src.id;
      r.text = decode(*m.vocab, output);
      r.label = src.label;
      r.meta["attack"] = o.mode;
      r.meta["guidance"] = guidance ? ordered_json(guidance->id()) : ordered_json(nullptr);
      r.meta["depth"] = o.mode == "recursive" ? o.depth : 1;
      r.meta["seed"] = seed_hex(seed);
      r.meta["global_seed"] = seed_hex(g.seed);
      r.meta["source_id"] = src.id;
      r.meta["output_tokens"] = output.size();
      r.meta["truncated"] = truncated;
      r.meta["source_meta"] = src.meta;
      res.record = std::move(r);
    } catch (const std::exception& e) {
      res.error = e.what();
    }
  });

  std::vector<data::Record> kept;
  std::string traces;
  std::size_t failures = 0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (!outcomes[i].record) {
      spdlog::warn("record {}: {}", records[i].id, outcomes[i].error);
      ++failures;
      continue;
    }
    kept.push_back(std::move(*outcomes[i].record));
    traces += outcomes[i].trace;
  }
  ensure_parent(o.out);
  data::save_dataset(o.out, kept);
  if (o.mode == "adversarial") {
    const std::string trace_path = o.trace_out.empty() ? o.out + ".trace.jsonl" : o.trace_out;
    ensure_parent(trace_path);
    write_file_atomic(trace_path, traces);
  }
  out << fmt::format("attacked {} of {} records ({} failures)\n", kept.size(), records.size(), failures);
  return failures > 0 && kept.empty() ? kExitData : kExitOk;
}

int cmd_detect(const Globals& g, const DetectOptions& o, std::ostream& out) {
  const Models m = load_models(o.models);
  const auto records = load_records(o.input, o.format);
  std::vector<std::shared_ptr<const detectors::Detector>> dets;
  for (const auto& p : o.detectors) dets.push_back(load_detector(p, m));

  std::vector<std::vector<detectors::DetectorScore>> scores(records.size());
  parallel_for(records.size(), g.threads, [&](std::size_t i) {
    const TokenSequence seq = encode(*m.vocab, records[i].text);
    for (const auto& d : dets) scores[i].push_back(d->score(seq));
  });
  std::string lines;
  for (std::size_t i = 0; i < records.size(); ++i) {
    for (std::size_t k = 0; k < dets.size(); ++k) {
      ordered_json j;
      j["id"] = records[i].id;
      j["label"] = data::to_string(records[i].label);
      j["detector"] = dets[k]->id();
      j["score"] = scores[i][k].value;
      j["flag"] = scores[i][k].flag == detectors::ScoreFlag::ok ? "ok" : "insufficient_length";
      lines += j.dump() + "\n";
    }
  }
  ensure_parent(o.out);
  write_file_atomic(o.out, lines);
  for (std::size_t k = 0; k < dets.size(); ++k) {
    std::vector<double> v;
    for (const auto& s : scores) v.push_back(s[k].value);
    out << fmt::format("{}: {} texts, mean score {}\n", dets[k]->id(), v.size(),
                       v.empty() ? "n/a" : format_fixed(eval::mean(v), 6));
  }
  return kExitOk;
}

int cmd_eval(const Globals& g, const EvalOptions& o, std::ostream& out) {
  const Models m = load_models(o.models);
  std::vector<std::shared_ptr<const detectors::Detector>> dets;
  std::set<std::string> det_ids;
  for (const auto& p : o.detectors) {
    dets.push_back(load_detector(p, m));
    if (!det_ids.insert(dets.back()->id()).second) throw ConfigError("duplicate detector id " + dets.back()->id());
  }

  struct Run {
    std::string name;
    std::string path;
    std::vector<data::Record> records;
    std::string attack;    // meta "attack", empty for unattacked data
    std::string guidance;  // meta "guidance" of adversarial runs
  };
  std::vector<Run> runs;
  for (const auto& spec : o.runs) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
      throw ConfigError("--run expects name=path, got '" + spec + "'");
    }
    Run r{spec.substr(0, eq), spec.substr(eq + 1), {}, {}, {}};
    if (!fs::exists(r.path)) throw ConfigError("run file not found: " + r.path);
    for (const auto& other : runs) {
      if (other.name == r.name) throw ConfigError("duplicate run name " + r.name);
    }
    r.records = data::load_dataset(r.path);
    if (r.records.empty()) throw DataError("run " + r.name + " is empty");
    const auto& meta = r.records.front().meta;
    if (meta.contains("attack") && meta["attack"].is_string()) r.attack = meta["attack"].get<std::string>();
    if (meta.contains("guidance") && meta["guidance"].is_string()) r.guidance = meta["guidance"].get<std::string>();
    runs.push_back(std::move(r));
  }
  const auto human = data::load_dataset(o.human);
  if (human.empty()) throw DataError("human dataset " + o.human + " is empty");

  auto score_all = [&](const detectors::Detector& d, const std::vector<data::Record>& records) {
    std::vector<double> s(records.size());
    parallel_for(records.size(), g.threads,
                 [&](std::size_t i) { s[i] = d.score(encode(*m.vocab, records[i].text)).value; });
    return s;
  };

  const fs::path dir(o.out_dir);
  fs::create_directories(dir / "roc");
  std::string metrics = "detector,run,auc,tpr_at_1pct_fpr\n";
  std::map<eval::RunKey, eval::ScoredDataset> transfer_runs;
  std::map<std::string, eval::ScoredDataset> baselines;
  for (const auto& d : dets) {
    const auto neg = score_all(*d, human);
    for (const auto& run : runs) {
      eval::ScoredDataset ds{score_all(*d, run.records), neg, d->id(), run.name, run.path};
      const auto curve = eval::roc_curve(ds);
      write_file_atomic(dir / "roc" / (d->id() + "__" + run.name + ".csv"), eval::roc_to_csv(curve));
      const auto dm = eval::detection_metrics(ds);
      metrics += fmt::format("{},{},{},{}\n", d->id(), run.name, format_fixed(dm.auc, 6),
                             format_fixed(dm.tpr_at_1pct_fpr, 6));
      out << fmt::format("{:<16} {:<16} auc {} t@1%f {}\n", d->id(), run.name, format_fixed(dm.auc, 4),
                         format_fixed(dm.tpr_at_1pct_fpr, 4));
      if (run.name == "none") {
        baselines[d->id()] = ds;
      } else if (run.attack == "simple") {
        transfer_runs[{eval::kSimpleParaphraseRow, d->id()}] = ds;
      } else if (run.attack == "adversarial" && !run.guidance.empty()) {
        if (!transfer_runs.emplace(eval::RunKey{run.guidance, d->id()}, ds).second) {
          throw ConfigError("two adversarial runs share guidance " + run.guidance);
        }
      }
    }
  }
  write_file_atomic(dir / "metrics.csv", metrics);
  write_file_atomic(dir / "transfer.csv", eval::transfer_matrix(transfer_runs, baselines).to_csv());

  std::string ppl = "run,texts,mean_perplexity\n";
  ppl += fmt::format("human,{},{}\n", human.size(), format_fixed(mean_perplexity(*m.lm, *m.vocab, human), 6));
  for (const auto& run : runs) {
    ppl += fmt::format("{},{},{}\n", run.name, run.records.size(),
                       format_fixed(mean_perplexity(*m.lm, *m.vocab, run.records), 6));
  }
  write_file_atomic(dir / "perplexity.csv", ppl);

  if (!o.originals.empty()) {
    std::map<std::string, std::string> originals;
    for (const auto& r : data::load_dataset(o.originals)) originals[r.id] = r.text;
    auto source_of = [](const data::Record& r) {
      const auto& meta = r.meta;
      return meta.contains("source_id") && meta["source_id"].is_string() ? meta["source_id"].get<std::string>() : r.id;
    };
    std::map<std::string, std::string> simple_texts;
    for (const auto& run : runs) {
      if (run.attack != "simple") continue;
      for (const auto& r : run.records) simple_texts[source_of(r)] = r.text;
      break;
    }
    const eval::HeuristicJudge judge(*m.vocab, m.lm);
    std::string lines;
    for (const auto& run : runs) {
      if (run.name == "none") continue;
      std::vector<eval::QualityItem> items;
      for (const auto& r : run.records) {
        const auto src = source_of(r);
        const auto it = originals.find(src);
        eval::QualityItem item{r.id, it == originals.end() ? std::string() : it->second, r.text, std::nullopt};
        if (run.attack == "adversarial") {
          if (auto s = simple_texts.find(src); s != simple_texts.end()) item.rival = s->second;
        }
        items.push_back(std::move(item));
      }
      const auto report = eval::quality_report(items, judge);
      for (const auto& rec : report.records) {
        ordered_json j;
        j["run"] = run.name;
        j["id"] = rec.id;
        j["rating"] = rec.rating ? ordered_json(*rec.rating) : ordered_json(nullptr);
        if (rec.verdict) j["verdict"] = eval::to_string(*rec.verdict);
        if (!rec.error.empty()) j["error"] = rec.error;
        lines += j.dump() + "\n";
      }
      out << fmt::format("quality {:<16} mean rating {} ({} failures)", run.name, format_fixed(report.mean_rating, 3),
                         report.failures);
      if (report.wins + report.ties + report.losses > 0) {
        out << fmt::format(" vs simple: {} wins {} ties {} losses", report.wins, report.ties, report.losses);
      }
      out << "\n";
    }
    write_file_atomic(dir / "quality.jsonl", lines);
  }

  ordered_json manifest;
  manifest["seed"] = seed_hex(g.seed);
  manifest["lm"] = o.models.lm;
  manifest["vocab"] = o.models.vocab;
  manifest["human"] = o.human;
  manifest["detectors"] = o.detectors;
  manifest["runs"] = o.runs;
  if (!o.originals.empty()) manifest["originals"] = o.originals;
  write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
  return kExitOk;
}

int cmd_validate_schema(const Globals&, const SchemaOptions& o, std::ostream& out) {
  const std::string text = read_file(o.input);
  const auto issues = data::validate_schema(text);
  for (const auto& issue : issues) out << o.input << ":" << issue.line << ": " << issue.message << "\n";
  if (!issues.empty()) return kExitData;
  out << o.input << ": ok (" << data::parse_dataset(text).size() << " records)\n";
  return kExitOk;
}

int cmd_trace_check(const Globals&, const TraceCheckOptions& o, std::ostream& out) {
  const auto steps = attack::parse_trace_jsonl(read_file(o.input));
  std::vector<std::vector<attack::TraceFileStep>> groups;
  std::map<std::string, std::size_t> index;
  for (const auto& s : steps) {
    auto [it, fresh] = index.emplace(s.record_id, groups.size());
    if (fresh) {
      groups.emplace_back();
    } else if (it->second + 1 != groups.size()) {
      out << o.input << ": steps of record " << s.record_id << " are not contiguous\n";
      return kExitData;
    }
    groups[it->second].push_back(s);
  }
  std::size_t bad = 0;
  for (const auto& group : groups) {
    if (group.front().step != 0) {
      out << "record " << group.front().record_id << ": trace does not start at step 0\n";
      ++bad;
      continue;
    }
    if (const auto v = attack::check_trace_file(group)) {
      out << "record " << group.front().record_id << " step " << v->step << ": " << v->reason << "\n";
      ++bad;
    }
  }
  if (bad > 0) return kExitData;
  out << o.input << ": ok (" << groups.size() << " records, " << steps.size() << " steps)\n";
  return kExitOk;
}

}  // namespace advpara::cli
