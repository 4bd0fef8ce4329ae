#include "lmcurate/pipeline.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "lmcurate/hashing.hpp"
#include "lmcurate/io.hpp"
#include "lmcurate/ngram.hpp"
#include "lmcurate/rng.hpp"

namespace lmcurate {

namespace fs = std::filesystem;
using nlohmann::json;

ExitCode classify(const std::exception& e) {
  if (const auto* s = dynamic_cast<const StageError*>(&e)) return s->code();
  if (dynamic_cast<const ConfigError*>(&e)) return ExitCode::kConfig;
  if (dynamic_cast<const InputError*>(&e)) return ExitCode::kInput;
  return ExitCode::kStage;
}

RunLock::RunLock(const fs::path& dir) : path_(dir / files::kLock) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0) {
    throw IoError("output directory " + dir.string() +
                  " is locked by another run (remove " + path_.string() + " if stale)");
  }
  const std::string pid = std::to_string(::getpid()) + "\n";
  [[maybe_unused]] auto n = ::write(fd, pid.data(), pid.size());
  ::close(fd);
}

RunLock::~RunLock() {
  std::error_code ec;
  fs::remove(path_, ec);
}

// ---------------------------------------------------------------------------
// Stage bodies

json ingest_files(const std::vector<InputSpec>& inputs, std::vector<Sample>& samples) {
  if (inputs.empty()) throw ConfigError("no input corpora configured");
  json per_input = json::array();
  SampleId next = samples.empty() ? 0 : samples.back().id() + 1;
  for (const auto& in : inputs) {
    std::ifstream stream(in.path, std::ios::binary);
    if (!stream) throw InputError("cannot read input " + in.path.string());
    IngestResult r;
    try {
      r = ingest(stream, in.format, in.source, next);
    } catch (const RecordError& e) {
      throw RecordError(e.line(), in.path.string() + ": " + e.what());
    } catch (const DecodeError& e) {
      throw DecodeError(e.offset(), in.path.string() + ": " + e.what());
    }
    next += r.samples.size();
    per_input.push_back({{"path", in.path.filename().string()},
                         {"format", to_string(in.format)},
                         {"source", in.source},
                         {"samples", r.samples.size()},
                         {"skipped_empty", r.skipped_empty}});
    samples.insert(samples.end(), std::make_move_iterator(r.samples.begin()),
                   std::make_move_iterator(r.samples.end()));
  }
  return {{"inputs", per_input}, {"stats", io::to_json(corpus_stats(samples))}};
}

json filter_samples(const std::vector<Sample>& samples, const FilterStageOptions& options,
                    std::vector<Sample>& kept, std::vector<RejectionRecord>& rejected) {
  std::vector<Sample> base;
  std::vector<Sample> replacement;
  for (const auto& s : samples) {
    (s.source() == options.replacement_source ? replacement : base).push_back(s);
  }
  auto base_result = apply_filters(base, options.filter);
  FilterResult repl_result;
  if (options.filter_replacement) {
    repl_result = apply_filters(replacement, options.filter);
  } else {
    repl_result.kept = replacement;
    repl_result.stats = corpus_stats(replacement);
  }

  kept = std::move(base_result.kept);
  kept.insert(kept.end(), repl_result.kept.begin(), repl_result.kept.end());
  std::sort(kept.begin(), kept.end(),
            [](const Sample& a, const Sample& b) { return a.id() < b.id(); });
  rejected = std::move(base_result.rejected);
  rejected.insert(rejected.end(), repl_result.rejected.begin(), repl_result.rejected.end());
  std::sort(rejected.begin(), rejected.end(),
            [](const auto& a, const auto& b) { return a.sample_id < b.sample_id; });

  std::map<std::string, std::uint64_t> by_reason = {
      {"duplicate", 0}, {"too_short", 0}, {"punct_ratio", 0}};
  for (const auto& r : rejected) ++by_reason[std::string(to_string(r.reason))];

  CorpusStats stats = corpus_stats(kept);
  stats.duplicate_count = base_result.stats.duplicate_count + repl_result.stats.duplicate_count;
  return {{"stats", io::to_json(stats)},
          {"input_samples", samples.size()},
          {"rejections_by_reason", by_reason},
          {"filter_replacement", options.filter_replacement},
          {"replacement_source", options.replacement_source}};
}

json mix_samples(const std::vector<Sample>& samples, const MixSpec& spec,
                 std::vector<Sample>& mixed) {
  std::vector<Sample> base;
  std::vector<Sample> replacement;
  for (const auto& s : samples) {
    (s.source() == spec.replacement_source ? replacement : base).push_back(s);
  }
  json report;
  if (replacement.empty()) {
    // Nothing to mix in: the base corpus passes through untouched.
    mixed = base;
    report = io::to_json(MixReport{{}, {}, 0, 0, spec.seed, 0});
    report["skipped"] = true;
  } else {
    auto result = mix(base, replacement, spec);
    mixed = std::move(result.mixed);
    report = io::to_json(result.report);
    report["skipped"] = false;
  }
  report["target_replacement_words"] = spec.target_replacement_words;
  report["replacement_source"] = spec.replacement_source;
  report["replacement_pool_samples"] = replacement.size();
  report["stats_before"] = io::to_json(corpus_stats(base));
  report["stats_after"] = io::to_json(corpus_stats(mixed));
  return report;
}

json quantiles(std::vector<double> values) {
  json out = json::object();
  if (values.empty()) return out;
  std::sort(values.begin(), values.end());
  for (const auto& [name, q] : std::vector<std::pair<const char*, double>>{
           {"min", 0.0}, {"p10", 0.1}, {"p25", 0.25}, {"p50", 0.5},
           {"p75", 0.75}, {"p90", 0.9}, {"max", 1.0}}) {
    const auto idx = static_cast<std::size_t>(
        std::floor(q * static_cast<double>(values.size() - 1) + 0.5));
    out[name] = values[idx];
  }
  return out;
}

json score_report(const std::vector<ComplexityScore>& scores, const ScoringConfig& config) {
  std::vector<double> values;
  values.reserve(scores.size());
  for (const auto& s : scores) values.push_back(s.score);
  json report{{"count", scores.size()},
              {"scoring", {{"normalize", config.normalize}}},
              {"score_quantiles", quantiles(values)}};
  json weights = json::object();
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    weights[std::string(kFeatureNames[i])] = config.weights[i];
  }
  report["scoring"]["weights"] = weights;
  if (!scores.empty()) {
    std::vector<FeatureVector> raw;
    raw.reserve(scores.size());
    for (const auto& s : scores) raw.push_back(s.raw_features);
    const auto n = Normalizer::fit(raw);
    json mins = json::object();
    json maxs = json::object();
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
      mins[std::string(kFeatureNames[i])] = n.min(static_cast<Feature>(i));
      maxs[std::string(kFeatureNames[i])] = n.max(static_cast<Feature>(i));
    }
    report["normalizer"] = {{"min", mins}, {"max", maxs}};
  }
  return report;
}

json tokenizer_report(const Tokenizer& tokenizer, const std::vector<Sample>& corpus) {
  const auto m = tokenizer_metrics(tokenizer, corpus);
  return {{"vocab_size", tokenizer.vocab_size()},
          {"requested_vocab_size", tokenizer.requested_vocab_size()},
          {"shortfall", tokenizer.shortfall()},
          {"merges", tokenizer.merges().size()},
          {"metrics",
           {{"fertility", m.fertility},
            {"compression", m.compression},
            {"vocab_utilization", m.vocab_utilization},
            {"words", m.words},
            {"tokens", m.tokens},
            {"bytes", m.bytes}}}};
}

json evaluate_curriculum(const std::vector<Sample>& samples,
                         const std::vector<SampleId>& ordered_ids, const Tokenizer& tokenizer,
                         const EvalOptions& options) {
  std::unordered_map<SampleId, const Sample*> by_id;
  by_id.reserve(samples.size());
  for (const auto& s : samples) by_id.emplace(s.id(), &s);

  const std::size_t third = ordered_ids.size() / 3;
  json report{{"order", options.eval.order},
              {"discount", options.eval.discount},
              {"vocab_size", tokenizer.vocab_size()},
              {"ppl_uniform", static_cast<double>(tokenizer.vocab_size())}};
  if (third < 2) {
    report["skipped"] = "corpus too small for tercile evaluation";
    return report;
  }

  SplitMix64 rng(substream_seed(options.seed, "eval"));
  auto shuffled = [&](std::size_t begin, std::size_t end) {
    std::vector<SampleId> ids(ordered_ids.begin() + static_cast<std::ptrdiff_t>(begin),
                              ordered_ids.begin() + static_cast<std::ptrdiff_t>(end));
    for (std::size_t i = 0; i + 1 < ids.size(); ++i) {
      std::swap(ids[i], ids[i + rng.below(ids.size() - i)]);
    }
    return ids;
  };
  const auto low = shuffled(0, third);
  const auto high = shuffled(ordered_ids.size() - third, ordered_ids.size());
  const std::size_t heldout = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(options.eval.heldout_fraction *
                                               static_cast<double>(third))));

  auto texts = [&](const std::vector<SampleId>& ids, std::size_t begin, std::size_t end) {
    std::vector<std::string> out;
    for (std::size_t i = begin; i < std::min(end, ids.size()); ++i) {
      out.push_back(by_id.at(ids[i])->text());
    }
    return out;
  };
  const auto low_heldout = texts(low, 0, heldout);
  const auto high_heldout = texts(high, 0, heldout);
  const auto train_texts = texts(low, heldout, heldout + options.eval.max_train_samples);

  std::vector<std::vector<TokenId>> train;
  train.reserve(train_texts.size());
  for (const auto& t : train_texts) train.push_back(tokenizer.encode(t));
  const auto model =
      NgramModel::train(train, tokenizer.vocab_size(), tokenizer.special_id("<bos>"),
                        tokenizer.special_id("<eos>"), options.eval.order,
                        options.eval.discount);

  report["train_samples"] = train_texts.size();
  report["heldout_samples"] = low_heldout.size();
  report["ppl_low_heldout"] = perplexity(model, low_heldout, tokenizer);
  report["ppl_high"] = perplexity(model, high_heldout, tokenizer);

  if (options.eval.pairs) {
    const auto pairs = io::read_pairs(*options.eval.pairs);
    const auto acc = minimal_pair_accuracy(model, pairs, tokenizer);
    report["minimal_pairs"] = {{"pairs", acc.pairs},
                               {"accuracy", acc.accuracy},
                               {"by_phenomenon", acc.by_phenomenon}};
  }
  return report;
}

// ---------------------------------------------------------------------------
// Stage runner

namespace {

struct StageSpec {
  std::string name;
  json params;
  std::vector<fs::path> inputs;
  // Runs the stage and returns its output paths relative to the run dir.
  std::function<std::vector<std::string>()> run;
};

class Runner {
 public:
  explicit Runner(fs::path dir) : dir_(std::move(dir)) {}

  void stage(StageSpec spec, PipelineReport& report) {
    try {
      const std::string key = stage_key(spec);
      const fs::path record_path = dir_ / files::kCacheDir / (spec.name + ".json");
      if (!dirty_ && cache_valid(record_path, key)) {
        report.cached.push_back(spec.name);
        outputs_[spec.name] = io::read_json(record_path).at("outputs");
        return;
      }
      dirty_ = true;
      const auto produced = spec.run();
      json hashes = json::object();
      for (const auto& rel : produced) hashes[rel] = sha256_file(dir_ / rel);
      io::write_json(record_path, {{"stage", spec.name}, {"key", key}, {"outputs", hashes}});
      outputs_[spec.name] = hashes;
      report.recomputed.push_back(spec.name);
    } catch (const StageError&) {
      throw;
    } catch (const std::exception& e) {
      throw StageError(spec.name, classify(e), e.what());
    }
  }

  const std::map<std::string, json>& outputs() const { return outputs_; }

 private:
  std::string stage_key(const StageSpec& spec) const {
    std::string material = spec.name + "\n" + spec.params.dump() + "\n";
    for (const auto& in : spec.inputs) material += sha256_file(in) + "\n";
    return sha256_hex(material);
  }

  bool cache_valid(const fs::path& record_path, const std::string& key) const {
    if (!fs::exists(record_path)) return false;
    json record;
    try {
      record = io::read_json(record_path);
    } catch (const std::exception&) {
      return false;
    }
    if (record.value("key", std::string()) != key) return false;
    for (const auto& [rel, hash] : record.at("outputs").items()) {
      const fs::path p = dir_ / rel;
      if (!fs::exists(p) || sha256_file(p) != hash.get<std::string>()) return false;
    }
    return true;
  }

  fs::path dir_;
  bool dirty_ = false;
  std::map<std::string, json> outputs_;
};

// Loaded or freshly produced sample files, shared between stages.
class SampleCache {
 public:
  const std::vector<Sample>& get(const fs::path& path) {
    auto it = cache_.find(path.string());
    if (it == cache_.end()) {
      it = cache_.emplace(path.string(), io::read_samples(path)).first;
    }
    return it->second;
  }
  void put(const fs::path& path, std::vector<Sample> samples) {
    cache_[path.string()] = std::move(samples);
  }

 private:
  std::map<std::string, std::vector<Sample>> cache_;
};

}  // namespace

PipelineReport run_pipeline(const RunConfig& config) {
  config.validate();
  const fs::path dir = config.output_dir;
  RunLock lock(dir);

  PipelineReport report;
  Runner runner(dir);
  SampleCache samples;
  const json resolved = to_json(config);
  io::write_json(dir / files::kResolvedConfig, resolved);

  const fs::path samples_path = dir / files::kSamples;
  const fs::path filtered_path = dir / files::kFiltered;
  const fs::path mixed_path = dir / files::kMixed;
  const fs::path scores_path = dir / files::kScores;
  const fs::path order_path = dir / files::kOrder;
  const fs::path schedule_path = dir / files::kSchedule;
  const fs::path tokenizer_path = dir / files::kTokenizer;
  const fs::path shard_dir = dir / files::kShardDir;

  {
    std::vector<fs::path> inputs;
    for (const auto& in : config.inputs) inputs.push_back(in.path);
    json params = json::array();
    for (const auto& in : config.inputs) {
      params.push_back({{"format", to_string(in.format)}, {"source", in.source}});
    }
    runner.stage({"ingest", params, inputs,
                  [&] {
                    std::vector<Sample> out;
                    const json r = ingest_files(config.inputs, out);
                    io::write_samples(samples_path, out);
                    io::write_json(dir / files::kIngestReport, r);
                    samples.put(samples_path, std::move(out));
                    return std::vector<std::string>{files::kSamples, files::kIngestReport};
                  }},
                 report);
  }

  FilterStageOptions filter_opts{config.filter, config.filter_replacement,
                                 config.replacement_source};
  runner.stage({"filter",
                {{"filter", resolved.at("filter")}, {"replacement_source", config.replacement_source}},
                {samples_path},
                [&] {
                  std::vector<Sample> kept;
                  std::vector<RejectionRecord> rejected;
                  const json r = filter_samples(samples.get(samples_path), filter_opts, kept, rejected);
                  io::write_samples(filtered_path, kept);
                  io::write_rejections(dir / files::kRejections, rejected);
                  io::write_json(dir / files::kFilterReport, r);
                  samples.put(filtered_path, std::move(kept));
                  return std::vector<std::string>{files::kFiltered, files::kRejections,
                                                  files::kFilterReport};
                }},
               report);

  const MixSpec mix_spec = config.mix_spec();
  runner.stage({"mix", resolved.at("mix"), {filtered_path},
                [&] {
                  std::vector<Sample> mixed;
                  json r = mix_samples(samples.get(filtered_path), mix_spec, mixed);
                  r["filter_replacement"] = config.filter_replacement;
                  io::write_samples(mixed_path, mixed);
                  io::write_json(dir / files::kMixReport, r);
                  samples.put(mixed_path, std::move(mixed));
                  return std::vector<std::string>{files::kMixed, files::kMixReport};
                }},
               report);

  runner.stage({"score", resolved.at("scoring"), {mixed_path},
                [&] {
                  const auto scores = score_corpus(samples.get(mixed_path), config.scoring);
                  io::write_scores(scores_path, scores);
                  io::write_json(dir / files::kScoreReport, score_report(scores, config.scoring));
                  return std::vector<std::string>{files::kScores, files::kScoreReport};
                }},
               report);

  runner.stage({"sort", json::object(), {scores_path},
                [&] {
                  const auto ids = sort_by_score(io::read_scores(scores_path));
                  io::write_json(order_path, {{"ordered_ids", ids}});
                  return std::vector<std::string>{files::kOrder};
                }},
               report);

  runner.stage({"schedule", resolved.at("curriculum"), {order_path},
                [&] {
                  auto ids = io::read_json(order_path).at("ordered_ids").get<std::vector<SampleId>>();
                  const auto s = build_schedule(std::move(ids), config.epochs, config.pacing,
                                                config.recipe);
                  io::write_json(schedule_path, to_json(s));
                  return std::vector<std::string>{files::kSchedule};
                }},
               report);

  runner.stage({"tokenize", resolved.at("tokenizer"), {mixed_path},
                [&] {
                  const auto& corpus = samples.get(mixed_path);
                  const auto tok = Tokenizer::train(corpus, config.vocab_size, config.specials);
                  io::write_json(tokenizer_path, tok.to_json());
                  io::write_json(dir / files::kTokenizerReport, tokenizer_report(tok, corpus));
                  return std::vector<std::string>{files::kTokenizer, files::kTokenizerReport};
                }},
               report);

  runner.stage({"shard", {{"shard_size", config.shard_size}},
                {mixed_path, scores_path, schedule_path},
                [&] {
                  const auto schedule = schedule_from_json(io::read_json(schedule_path));
                  std::unordered_map<SampleId, double> score_of;
                  for (const auto& s : io::read_scores(scores_path)) score_of[s.sample_id] = s.score;
                  std::unordered_map<SampleId, const Sample*> by_id;
                  for (const auto& s : samples.get(mixed_path)) by_id[s.id()] = &s;
                  std::vector<ScoredSample> ordered;
                  ordered.reserve(schedule.ordered_ids.size());
                  for (auto id : schedule.ordered_ids) {
                    ordered.push_back({*by_id.at(id), score_of.at(id)});
                  }
                  const auto manifest =
                      emit_shards(ordered, schedule, config.shard_size, shard_dir);
                  std::vector<std::string> out;
                  for (const auto& s : manifest.shards) {
                    out.push_back(std::string(files::kShardDir) + "/" + s.path);
                  }
                  out.push_back(std::string(files::kShardDir) + "/" + kManifestName);
                  return out;
                }},
               report);

  if (config.eval.enabled) {
    std::vector<fs::path> inputs{mixed_path, schedule_path, tokenizer_path};
    if (config.eval.pairs) inputs.push_back(*config.eval.pairs);
    runner.stage({"eval", {{"eval", resolved.at("eval")}, {"seed", config.seed}}, inputs,
                  [&] {
                    const auto schedule = schedule_from_json(io::read_json(schedule_path));
                    const auto tok = Tokenizer::from_json(io::read_json(tokenizer_path));
                    const json r = evaluate_curriculum(samples.get(mixed_path),
                                                       schedule.ordered_ids, tok,
                                                       {config.eval, config.seed});
                    io::write_json(dir / files::kEvalReport, r);
                    return std::vector<std::string>{files::kEvalReport};
                  }},
                 report);
  }

  json stages = json::array();
  for (const auto& [name, outputs] : runner.outputs()) {
    stages.push_back({{"stage", name}, {"outputs", outputs}});
  }
  // The output location is not part of what a run computes.
  json location_free = resolved;
  location_free.erase("output_dir");
  report.document = {{"config_sha256", sha256_hex(location_free.dump())}, {"stages", stages}};
  io::write_json(dir / files::kPipelineReport, report.document);
  return report;
}

// ---------------------------------------------------------------------------
// Summaries

json summarize_reports(const std::vector<fs::path>& paths) {
  std::vector<fs::path> reports;
  for (const auto& p : paths) {
    if (fs::is_directory(p)) {
      for (const char* name : {files::kFilterReport, files::kMixReport, files::kScoreReport,
                               files::kTokenizerReport, files::kEvalReport}) {
        if (fs::exists(p / name)) reports.push_back(p / name);
      }
    } else if (fs::exists(p)) {
      reports.push_back(p);
    } else {
      throw InputError("missing report " + p.string());
    }
  }
  if (reports.empty()) throw InputError("no reports found");

  json summary = json::object();
  for (const auto& r : reports) {
    const json doc = io::read_json(r);
    const std::string name = r.filename().string();
    if (name == files::kFilterReport) {
      summary["rejections_by_reason"] = doc.at("rejections_by_reason");
      summary["duplicate_count"] = doc.at("stats").at("duplicate_count");
      summary["words_by_source"] = doc.at("stats").at("words_by_source");
      summary["total_words"] = doc.at("stats").at("total_words");
    } else if (name == files::kMixReport) {
      // Mixing runs after filtering, so its totals supersede the filter's.
      summary["words_by_source"] = doc.at("stats_after").at("words_by_source");
      summary["total_words"] = doc.at("stats_after").at("total_words");
      summary["mix"] = {{"removed_words", doc.at("removed_words")},
                        {"added_words", doc.at("added_words")},
                        {"skipped", doc.value("skipped", false)}};
    } else if (name == files::kScoreReport) {
      summary["score_quantiles"] = doc.at("score_quantiles");
    } else if (name == files::kTokenizerReport) {
      summary["tokenizer"] = doc;
    } else if (name == files::kEvalReport) {
      summary["eval"] = doc;
    } else {
      throw InputError("unrecognised report " + r.string());
    }
  }
  return summary;
}

std::string render_summary(const json& s) {
  std::ostringstream out;
  if (s.contains("total_words")) {
    out << "words: " << s["total_words"].get<std::uint64_t>() << "\n";
    for (const auto& [source, words] : s["words_by_source"].items()) {
      out << "  " << source << ": " << words.get<std::uint64_t>() << "\n";
    }
  }
  if (s.contains("rejections_by_reason")) {
    out << "rejections:\n";
    for (const auto& [reason, n] : s["rejections_by_reason"].items()) {
      out << "  " << reason << ": " << n.get<std::uint64_t>() << "\n";
    }
  }
  if (s.contains("mix")) {
    out << "mix: removed " << s["mix"]["removed_words"] << " words, added "
        << s["mix"]["added_words"] << " words\n";
  }
  if (s.contains("score_quantiles")) {
    out << "score quantiles:";
    for (const auto& [q, v] : s["score_quantiles"].items()) out << " " << q << "=" << v;
    out << "\n";
  }
  if (s.contains("tokenizer")) {
    const auto& t = s["tokenizer"];
    out << "tokenizer: vocab " << t["vocab_size"] << " (requested " << t["requested_vocab_size"]
        << "), fertility " << t["metrics"]["fertility"] << ", bytes/token "
        << t["metrics"]["compression"] << ", utilization " << t["metrics"]["vocab_utilization"]
        << "\n";
  }
  if (s.contains("eval") && s["eval"].contains("ppl_low_heldout")) {
    out << "n-gram perplexity: low " << s["eval"]["ppl_low_heldout"] << ", high "
        << s["eval"]["ppl_high"] << ", uniform " << s["eval"]["ppl_uniform"] << "\n";
  }
  return out.str();
}

}  // namespace lmcurate
