// Command-line front end: one subcommand per pipeline stage plus `run`.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <unordered_map>

#include "lmcurate/config.hpp"
#include "lmcurate/curriculum.hpp"
#include "lmcurate/io.hpp"
#include "lmcurate/ngram.hpp"
#include "lmcurate/pipeline.hpp"
#include "lmcurate/tokenizer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace lmcurate;

namespace {

RunConfig base_config(const std::string& path) {
  return path.empty() ? RunConfig{} : load_config(path);
}

void print_json(const json& j) { std::cout << j.dump(2) << "\n"; }

std::unordered_map<SampleId, const Sample*> index_by_id(const std::vector<Sample>& samples) {
  std::unordered_map<SampleId, const Sample*> out;
  for (const auto& s : samples) out.emplace(s.id(), &s);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Corpus curation and curriculum scheduling pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  auto add_config = [&](CLI::App* cmd) {
    cmd->add_option("-c,--config", config_path, "Run config JSON supplying defaults");
  };

  // ingest
  std::vector<std::string> ingest_inputs;
  std::string ingest_format = "jsonl";
  std::string ingest_source = "base";
  std::string ingest_out = "samples.jsonl";
  std::string ingest_report;
  auto* ingest = app.add_subcommand("ingest", "Read raw corpora into a sample file");
  ingest->add_option("inputs", ingest_inputs, "Input files")->required();
  ingest->add_option("--format", ingest_format, "jsonl or plain_lines");
  ingest->add_option("--source", ingest_source, "Source tag for records without one");
  ingest->add_option("-o,--out", ingest_out, "Output sample file");
  ingest->add_option("--report", ingest_report, "Write the ingest report here");

  // filter
  std::string filter_in = "samples.jsonl";
  std::string filter_out = "filtered.jsonl";
  std::string filter_rejections = "rejections.jsonl";
  std::string filter_report;
  std::optional<std::string> max_punct_ratio;
  std::optional<std::size_t> min_chars;
  bool no_dedup = false;
  auto* filter = app.add_subcommand("filter", "Deduplicate and apply quality filters");
  add_config(filter);
  filter->add_option("-i,--in", filter_in, "Input sample file");
  filter->add_option("-o,--out", filter_out, "Kept samples");
  filter->add_option("--rejections", filter_rejections, "Rejection audit JSONL");
  filter->add_option("--report", filter_report, "Write the filter report here");
  filter->add_option("--max-punct-ratio", max_punct_ratio, "Decimal threshold, default 0.33");
  filter->add_option("--min-chars", min_chars, "Minimum characters, default 10");
  filter->add_flag("--no-dedup", no_dedup, "Skip duplicate removal");

  // mix
  std::string mix_in = "filtered.jsonl";
  std::string mix_out = "mixed.jsonl";
  std::string mix_report_path;
  std::optional<std::uint64_t> mix_target;
  std::optional<std::uint64_t> mix_seed;
  std::optional<std::string> mix_source;
  auto* mixcmd = app.add_subcommand("mix", "Replace a word budget with a secondary source");
  add_config(mixcmd);
  mixcmd->add_option("-i,--in", mix_in, "Filtered samples (all sources)");
  mixcmd->add_option("-o,--out", mix_out, "Mixed samples");
  mixcmd->add_option("--report", mix_report_path, "Write the mix report here");
  mixcmd->add_option("--target", mix_target, "Replacement words, default 1500000");
  mixcmd->add_option("--seed", mix_seed, "Run seed");
  mixcmd->add_option("--replacement-source", mix_source, "Source tag of the replacement pool");

  // score
  std::string score_in = "mixed.jsonl";
  std::string score_out = "scores.jsonl";
  std::string score_report_path;
  bool raw_scores = false;
  auto* score = app.add_subcommand("score", "Compute complexity features and scores");
  add_config(score);
  score->add_option("-i,--in", score_in, "Sample file");
  score->add_option("-o,--out", score_out, "Score JSONL");
  score->add_option("--report", score_report_path, "Write the score report here");
  score->add_flag("--raw", raw_scores, "Disable min-max normalisation");

  // sort
  std::string sort_in = "scores.jsonl";
  std::string sort_out = "order.json";
  auto* sortcmd = app.add_subcommand("sort", "Order sample ids by ascending score");
  sortcmd->add_option("-i,--in", sort_in, "Score JSONL");
  sortcmd->add_option("-o,--out", sort_out, "Ordered ids JSON");

  // schedule
  std::string sched_in = "order.json";
  std::string sched_out = "schedule.json";
  std::optional<std::uint64_t> epochs;
  std::optional<std::string> pacing;
  auto* sched = app.add_subcommand("schedule", "Build per-epoch exposure and LR series");
  add_config(sched);
  sched->add_option("-i,--in", sched_in, "Ordered ids JSON");
  sched->add_option("-o,--out", sched_out, "Schedule JSON");
  sched->add_option("--epochs", epochs, "Epoch count, default 5");
  sched->add_option("--pacing", pacing, "linear_prefix or full_each_epoch");

  // tokenize
  std::string tok_in = "mixed.jsonl";
  std::string tok_out = "tokenizer.json";
  std::string tok_report;
  std::optional<std::size_t> vocab_size;
  auto* tokcmd = app.add_subcommand("tokenize", "Train a byte-level BPE tokenizer");
  add_config(tokcmd);
  tokcmd->add_option("-i,--in", tok_in, "Sample file");
  tokcmd->add_option("-o,--out", tok_out, "Tokenizer model JSON");
  tokcmd->add_option("--report", tok_report, "Write tokenizer metrics here");
  tokcmd->add_option("--vocab-size", vocab_size, "Target vocabulary size, default 32000");

  // encode
  std::string enc_model = "tokenizer.json";
  std::string enc_in;
  std::string enc_out;
  std::vector<std::string> enc_texts;
  bool enc_decode = false;
  auto* enc = app.add_subcommand("encode", "Encode text (or a sample file) to token ids");
  enc->add_option("-t,--tokenizer", enc_model, "Tokenizer model JSON");
  enc->add_option("-i,--in", enc_in, "Sample file to encode as JSONL {id, ids}");
  enc->add_option("-o,--out", enc_out, "Output JSONL (default stdout)");
  enc->add_option("text", enc_texts, "Literal texts to encode");
  enc->add_flag("--decode", enc_decode, "Treat positional args as ids and decode them");

  // shard
  std::string shard_samples = "mixed.jsonl";
  std::string shard_scores = "scores.jsonl";
  std::string shard_schedule = "schedule.json";
  std::string shard_dir = "shards";
  std::optional<std::uint64_t> shard_size;
  auto* shard = app.add_subcommand("shard", "Write curriculum-ordered shards and a manifest");
  add_config(shard);
  shard->add_option("--samples", shard_samples, "Sample file");
  shard->add_option("--scores", shard_scores, "Score JSONL");
  shard->add_option("--schedule", shard_schedule, "Schedule JSON");
  shard->add_option("-o,--out-dir", shard_dir, "Shard directory");
  shard->add_option("--shard-size", shard_size, "Samples per shard, default 10000");

  // eval-ngram
  std::string ev_samples = "mixed.jsonl";
  std::string ev_schedule = "schedule.json";
  std::string ev_tokenizer = "tokenizer.json";
  std::string ev_out;
  std::optional<std::string> ev_pairs;
  std::optional<std::size_t> ev_order;
  auto* ev = app.add_subcommand("eval-ngram",
                                "Train an n-gram model on the easiest tercile and evaluate");
  add_config(ev);
  ev->add_option("--samples", ev_samples, "Sample file");
  ev->add_option("--schedule", ev_schedule, "Schedule JSON");
  ev->add_option("--tokenizer", ev_tokenizer, "Tokenizer model JSON");
  ev->add_option("--pairs", ev_pairs, "Minimal pairs JSONL");
  ev->add_option("--order", ev_order, "n-gram order, default 3");
  ev->add_option("-o,--out", ev_out, "Write the evaluation report here");

  // stats
  std::vector<std::string> stats_paths;
  bool stats_json = false;
  auto* stats = app.add_subcommand("stats", "Summarise run reports");
  stats->add_option("paths", stats_paths, "Report files or run directories")->required();
  stats->add_flag("--json", stats_json, "Print JSON only");

  // run
  std::string run_config;
  std::string run_out;
  bool print_config = false;
  auto* run = app.add_subcommand("run", "Run the full pipeline from a config");
  run->add_option("-c,--config", run_config, "Run config JSON")->required();
  run->add_option("-o,--output-dir", run_out, "Override output_dir");
  run->add_flag("--print-config", print_config, "Print the resolved config and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ExitCode::kConfig);
  }

  try {
    if (*ingest) {
      std::vector<InputSpec> inputs;
      for (const auto& p : ingest_inputs) {
        inputs.push_back({p, parse_input_format(ingest_format), ingest_source});
      }
      std::vector<Sample> samples;
      const json report = ingest_files(inputs, samples);
      io::write_samples(ingest_out, samples);
      if (!ingest_report.empty()) io::write_json(ingest_report, report);
      print_json(report);
    } else if (*filter) {
      auto cfg = base_config(config_path);
      if (max_punct_ratio) cfg.filter.max_punct_ratio = Ratio::parse_decimal(*max_punct_ratio);
      if (min_chars) cfg.filter.min_chars = *min_chars;
      if (no_dedup) cfg.filter.dedup_enabled = false;
      std::vector<Sample> kept;
      std::vector<RejectionRecord> rejected;
      const json report = filter_samples(
          io::read_samples(filter_in),
          {cfg.filter, cfg.filter_replacement, cfg.replacement_source}, kept, rejected);
      io::write_samples(filter_out, kept);
      io::write_rejections(filter_rejections, rejected);
      if (!filter_report.empty()) io::write_json(filter_report, report);
      print_json(report);
    } else if (*mixcmd) {
      auto cfg = base_config(config_path);
      if (mix_target) cfg.target_replacement_words = *mix_target;
      if (mix_seed) cfg.seed = *mix_seed;
      if (mix_source) cfg.replacement_source = *mix_source;
      std::vector<Sample> mixed;
      const json report = mix_samples(io::read_samples(mix_in), cfg.mix_spec(), mixed);
      io::write_samples(mix_out, mixed);
      if (!mix_report_path.empty()) io::write_json(mix_report_path, report);
      print_json(report);
    } else if (*score) {
      auto cfg = base_config(config_path);
      if (raw_scores) cfg.scoring.normalize = false;
      const auto scores = score_corpus(io::read_samples(score_in), cfg.scoring);
      io::write_scores(score_out, scores);
      const json report = score_report(scores, cfg.scoring);
      if (!score_report_path.empty()) io::write_json(score_report_path, report);
      print_json(report);
    } else if (*sortcmd) {
      const auto ids = sort_by_score(io::read_scores(sort_in));
      io::write_json(sort_out, {{"ordered_ids", ids}});
      std::cout << "sorted " << ids.size() << " samples\n";
    } else if (*sched) {
      auto cfg = base_config(config_path);
      if (epochs) cfg.epochs = *epochs;
      if (pacing) cfg.pacing = parse_pacing(*pacing);
      auto ids = io::read_json(sched_in).at("ordered_ids").get<std::vector<SampleId>>();
      const auto s = build_schedule(std::move(ids), cfg.epochs, cfg.pacing, cfg.recipe);
      io::write_json(sched_out, to_json(s));
      print_json({{"epochs", s.epochs}, {"exposure", s.exposure}, {"lr_series", s.lr_series}});
    } else if (*tokcmd) {
      auto cfg = base_config(config_path);
      if (vocab_size) cfg.vocab_size = *vocab_size;
      const auto corpus = io::read_samples(tok_in);
      const auto tok = Tokenizer::train(corpus, cfg.vocab_size, cfg.specials);
      io::write_json(tok_out, tok.to_json());
      const json report = tokenizer_report(tok, corpus);
      if (!tok_report.empty()) io::write_json(tok_report, report);
      print_json(report);
    } else if (*enc) {
      const auto tok = Tokenizer::from_json(io::read_json(enc_model));
      std::ofstream file;
      if (!enc_out.empty()) {
        file.open(enc_out, std::ios::binary);
        if (!file) throw IoError("cannot write " + enc_out);
      }
      std::ostream& out = enc_out.empty() ? std::cout : file;
      if (enc_decode) {
        std::vector<TokenId> ids;
        for (const auto& t : enc_texts) ids.push_back(static_cast<TokenId>(std::stoul(t)));
        out << tok.decode(ids) << "\n";
      } else if (!enc_in.empty()) {
        for (const auto& s : io::read_samples(enc_in)) {
          out << json{{"id", s.id()}, {"ids", tok.encode(s.text())}}.dump() << "\n";
        }
      } else {
        for (const auto& t : enc_texts) out << json(tok.encode(t)).dump() << "\n";
      }
    } else if (*shard) {
      auto cfg = base_config(config_path);
      if (shard_size) cfg.shard_size = *shard_size;
      const auto schedule = schedule_from_json(io::read_json(shard_schedule));
      const auto samples = io::read_samples(shard_samples);
      const auto by_id = index_by_id(samples);
      std::unordered_map<SampleId, double> score_of;
      for (const auto& s : io::read_scores(shard_scores)) score_of[s.sample_id] = s.score;
      std::vector<ScoredSample> ordered;
      for (auto id : schedule.ordered_ids) {
        const auto it = by_id.find(id);
        const auto sc = score_of.find(id);
        if (it == by_id.end() || sc == score_of.end()) {
          throw InputError("sample " + std::to_string(id) + " missing from samples or scores");
        }
        ordered.push_back({*it->second, sc->second});
      }
      const auto manifest = emit_shards(ordered, schedule, cfg.shard_size, shard_dir);
      std::cout << "wrote " << manifest.shards.size() << " shards to " << shard_dir << "\n";
    } else if (*ev) {
      auto cfg = base_config(config_path);
      if (ev_order) cfg.eval.order = *ev_order;
      if (ev_pairs) cfg.eval.pairs = *ev_pairs;
      const auto schedule = schedule_from_json(io::read_json(ev_schedule));
      const auto tok = Tokenizer::from_json(io::read_json(ev_tokenizer));
      const json report = evaluate_curriculum(io::read_samples(ev_samples),
                                              schedule.ordered_ids, tok, {cfg.eval, cfg.seed});
      if (!ev_out.empty()) io::write_json(ev_out, report);
      print_json(report);
    } else if (*stats) {
      std::vector<fs::path> paths(stats_paths.begin(), stats_paths.end());
      const json summary = summarize_reports(paths);
      if (!stats_json) std::cout << render_summary(summary);
      print_json(summary);
    } else if (*run) {
      auto cfg = load_config(run_config);
      if (!run_out.empty()) cfg.output_dir = run_out;
      if (print_config) {
        print_json(to_json(cfg));
        return 0;
      }
      const auto report = run_pipeline(cfg);
      for (const auto& s : report.cached) std::cout << "cached     " << s << "\n";
      for (const auto& s : report.recomputed) std::cout << "recomputed " << s << "\n";
      std::cout << "outputs in " << cfg.output_dir.string() << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(classify(e));
  }
  return 0;
}
