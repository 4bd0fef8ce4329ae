#include <doctest.h>

#include <fstream>

#include "lmcurate/io.hpp"
#include "lmcurate/pipeline.hpp"
#include "oracles.hpp"

using namespace lmcurate;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kData = LMCURATE_DATA_DIR;

RunConfig toy_config(const fs::path& out) {
  auto c = load_config(kData / "toy_config.json");
  c.output_dir = out;
  return c;
}

// Every regular file under `dir` except the cache records, with contents.
std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), dir).string();
    if (rel.rfind(files::kCacheDir, 0) == 0) continue;
    out[rel] = io::read_text(e.path());
  }
  return out;
}

void write(const fs::path& p, const std::string& body) { std::ofstream(p) << body; }

}  // namespace

TEST_CASE("toy corpus runs end to end with five epochs") {
  const auto out = oracle::temp_dir("pipe_toy");
  const auto report = run_pipeline(toy_config(out));
  CHECK(report.cached.empty());
  CHECK(report.recomputed.size() == 9);
  const auto manifest = io::read_json(out / files::kShardDir / kManifestName);
  CHECK(manifest.at("epochs") == 5);
  CHECK(manifest.at("exposure").size() == 5);
  CHECK(manifest.at("recipe").at("batch_size") == 32);
  const auto eval = io::read_json(out / files::kEvalReport);
  CHECK(eval.at("ppl_low_heldout").get<double>() < eval.at("ppl_high").get<double>());
  CHECK(fs::exists(out / files::kResolvedConfig));
  CHECK_FALSE(fs::exists(out / files::kLock));
}

TEST_CASE("identical configs give byte-identical outputs; reruns are cached") {
  const auto a = oracle::temp_dir("pipe_det_a");
  const auto b = oracle::temp_dir("pipe_det_b");
  run_pipeline(toy_config(a));
  run_pipeline(toy_config(b));
  auto sa = snapshot(a);
  auto sb = snapshot(b);
  // The resolved config records the output location; nothing else may differ.
  sa.erase(files::kResolvedConfig);
  sb.erase(files::kResolvedConfig);
  CHECK(sa == sb);

  const auto again = run_pipeline(toy_config(a));
  CHECK(again.recomputed.empty());
  CHECK(again.cached.size() == 9);
  auto sa2 = snapshot(a);
  sa2.erase(files::kResolvedConfig);
  CHECK(sa2 == sa);
}

TEST_CASE("deleting the tokenizer recomputes only it and later stages") {
  const auto out = oracle::temp_dir("pipe_cache");
  run_pipeline(toy_config(out));
  const auto before = snapshot(out);
  fs::remove(out / files::kTokenizer);
  const auto r = run_pipeline(toy_config(out));
  CHECK(r.cached == std::vector<std::string>{"ingest", "filter", "mix", "score", "sort",
                                             "schedule"});
  CHECK(r.recomputed == std::vector<std::string>{"tokenize", "shard", "eval"});
  CHECK(snapshot(out) == before);
}

TEST_CASE("a parameter change invalidates the affected stage onwards") {
  const auto out = oracle::temp_dir("pipe_param");
  auto c = toy_config(out);
  run_pipeline(c);
  c.scoring.weights = {0.25, 0.25, 0.25, 0.25};
  const auto r = run_pipeline(c);
  CHECK(r.cached == std::vector<std::string>{"ingest", "filter", "mix"});
  CHECK(r.recomputed.front() == "score");
}

TEST_CASE("an edited input invalidates everything") {
  const auto dir = oracle::temp_dir("pipe_input");
  write(dir / "in.txt", "the quick brown fox jumps\nover the lazy dog today\n");
  RunConfig c;
  c.inputs = {{dir / "in.txt", InputFormat::kPlainLines, "base"}};
  c.output_dir = dir / "out";
  c.vocab_size = 300;
  c.recipe.vocab_size = 300;
  run_pipeline(c);
  write(dir / "in.txt", "the quick brown fox jumps\nover the lazy cat today\n");
  CHECK(run_pipeline(c).cached.empty());
}

TEST_CASE("an invalid config fails before any work") {
  const auto out = oracle::temp_dir("pipe_badconfig") / "run";
  auto c = toy_config(out);
  c.scoring.weights = {0.2, 0.2, 0.3, 0.2};
  CHECK_THROWS_AS(run_pipeline(c), ConfigError);
  CHECK_FALSE(fs::exists(out));
}

TEST_CASE("a stage failure names the stage and keeps earlier outputs") {
  const auto dir = oracle::temp_dir("pipe_stagefail");
  write(dir / "in.txt", "one two three four five\nsix seven eight nine ten\n");
  RunConfig c;
  c.inputs = {{dir / "in.txt", InputFormat::kPlainLines, "base"},
              {dir / "tv.txt", InputFormat::kPlainLines, "tv"}};
  write(dir / "tv.txt", "short tv line here\n");
  c.output_dir = dir / "out";
  c.target_replacement_words = 8;  // more than the tv pool holds
  try {
    run_pipeline(c);
    FAIL("expected StageError");
  } catch (const StageError& e) {
    CHECK(e.stage() == "mix");
    CHECK(e.code() == ExitCode::kConfig);
  }
  CHECK(fs::exists(c.output_dir / files::kFiltered));
  CHECK(fs::exists(c.output_dir / files::kCacheDir / "filter.json"));
  CHECK_FALSE(fs::exists(c.output_dir / files::kLock));
}

TEST_CASE("a missing input is an input error from ingest") {
  const auto dir = oracle::temp_dir("pipe_missing");
  RunConfig c;
  c.inputs = {{dir / "nope.txt", InputFormat::kPlainLines, "base"}};
  c.output_dir = dir / "out";
  try {
    run_pipeline(c);
    FAIL("expected StageError");
  } catch (const StageError& e) {
    CHECK(e.stage() == "ingest");
    CHECK(classify(e) == ExitCode::kInput);
  }
}

TEST_CASE("a held lock rejects a concurrent run") {
  const auto out = oracle::temp_dir("pipe_lock");
  RunLock held(out);
  CHECK_THROWS_AS(run_pipeline(toy_config(out)), IoError);
}

TEST_CASE("stats summaries") {
  const auto dir = oracle::temp_dir("pipe_stats");
  std::string body;
  for (int i = 0; i < 30; ++i) body += "distinct sample number " + std::to_string(i) + " here\n";
  body += "distinct sample number 1 here\ndistinct sample number 2 here\n";
  body += "distinct sample number 3 here\n";
  write(dir / "in.txt", body);
  write(dir / "tv.txt", "a tv line with six words\n");
  RunConfig c;
  c.inputs = {{dir / "in.txt", InputFormat::kPlainLines, "base"},
              {dir / "tv.txt", InputFormat::kPlainLines, "tv"}};
  c.output_dir = dir / "out";
  c.target_replacement_words = 0;
  c.vocab_size = 300;
  c.recipe.vocab_size = 300;
  run_pipeline(c);

  const auto s = summarize_reports({c.output_dir});
  CHECK(s.at("duplicate_count") == 3);
  CHECK(s.at("words_by_source").value("tv", 0) == 0);
  for (const auto& [q, v] : s.at("score_quantiles").items()) {
    CHECK(v.get<double>() >= 0);
    CHECK(v.get<double>() <= 1);
  }
  CHECK(render_summary(s).find("duplicate: 3") != std::string::npos);
  CHECK_THROWS_AS(summarize_reports({dir / "absent.json"}), InputError);
}
