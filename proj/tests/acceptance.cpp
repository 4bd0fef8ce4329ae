// Acceptance checks. Prints one [PASS]/[FAIL] line per criterion and exits
// non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>

#include "lmcurate/config.hpp"
#include "lmcurate/filters.hpp"
#include "lmcurate/hashing.hpp"
#include "lmcurate/io.hpp"
#include "lmcurate/mixing.hpp"
#include "lmcurate/ngram.hpp"
#include "lmcurate/pipeline.hpp"
#include "lmcurate/rng.hpp"
#include "lmcurate/scoring.hpp"
#include "lmcurate/tokenizer.hpp"
#include "oracles.hpp"

using namespace lmcurate;
namespace fs = std::filesystem;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

const fs::path kData = LMCURATE_DATA_DIR;
constexpr std::size_t kSpecials = 4;

struct Outcome {
  bool pass = true;
  std::string detail;
  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail = what;
    pass = pass && ok;
  }
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// Word-like tokens built from syllables, drawn with a Zipf-ish skew.
class WordSource {
 public:
  WordSource(std::uint64_t seed, std::size_t types) : rng_(seed) {
    static const char* syl[] = {"ka", "to", "ri", "sen", "mo", "la", "ve", "dun", "pi", "or",
                                "th", "e", "an", "qu", "is", "al", "be", "nu", "cha", "ir"};
    for (std::size_t i = 0; i < types; ++i) {
      std::string w;
      const std::size_t n = 1 + rng_.below(4);
      for (std::size_t k = 0; k < n; ++k) w += syl[rng_.below(20)];
      words_.push_back(w);
    }
  }
  const std::string& draw() {
    // Cubing a uniform variate biases toward low ranks.
    const double u = rng_.uniform();
    return words_[static_cast<std::size_t>(u * u * u * static_cast<double>(words_.size()))];
  }
  SplitMix64& rng() { return rng_; }

 private:
  SplitMix64 rng_;
  std::vector<std::string> words_;
};

std::string sentence(WordSource& ws, std::size_t n) {
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) out += ' ';
    out += ws.draw();
    if (ws.rng().below(12) == 0) out += ',';
  }
  out += ws.rng().below(4) == 0 ? "?" : ".";
  return out;
}

// ---------------------------------------------------------------------------

Outcome ac1_filters() {
  Outcome o;
  SplitMix64 rng(101);
  std::vector<std::pair<std::string, std::string>> items;  // text, expected reason
  std::vector<std::string> clean;
  for (int i = 0; i < 870; ++i) {
    clean.push_back("clean sample " + std::to_string(i) + " with ordinary words");
  }
  // Boundary samples: exactly ten characters, and a ratio of exactly 0.33.
  for (int i = 0; i < 5; ++i) clean.push_back("boundary" + std::to_string(10 + i));
  for (int i = 0; i < 5; ++i) {
    std::string s;
    for (int w = 0; w < 100; ++w) {
      s += (w ? " " : "") + std::string("r") + std::to_string(i) + (w < 33 ? "." : "");
    }
    clean.push_back(s);
  }
  for (const auto& c : clean) items.emplace_back(c, "");
  for (int i = 0; i < 40; ++i) items.emplace_back("tiny " + std::to_string(i), "too_short");
  for (int i = 0; i < 30; ++i) {
    items.emplace_back("loud, " + std::to_string(i) + "!! again!", "punct_ratio");
  }
  for (std::size_t i = items.size() - 1; i > 0; --i) {
    std::swap(items[i], items[rng.below(i + 1)]);
  }
  // Duplicates go after their originals so the original is the survivor.
  for (int i = 0; i < 50; ++i) {
    const auto& src = clean[static_cast<std::size_t>(i) * 17];
    items.emplace_back(src, "duplicate");
  }
  if (items.size() != 1000) o.require(false, "fixture size");

  std::vector<Sample> samples;
  std::map<SampleId, std::string> expected;
  for (std::size_t i = 0; i < items.size(); ++i) {
    samples.emplace_back(i, items[i].first, "base");
    if (!items[i].second.empty()) expected[i] = items[i].second;
  }
  const auto t0 = Clock::now();
  const auto r = apply_filters(samples, {});
  const double secs = seconds_since(t0);

  std::map<SampleId, std::string> got;
  for (const auto& x : r.rejected) got[x.sample_id] = std::string(to_string(x.reason));
  o.require(got == expected, "rejections differ from the planted set");
  o.require(r.kept.size() == 880, "kept count");
  o.require(secs < 1.0, "runtime");
  o.detail = o.pass ? "880 kept, 50 duplicate / 40 too_short / 30 punct_ratio, boundaries kept, " +
                          fmt("%.3f s", secs)
                    : o.detail;
  return o;
}

Outcome ac2_scoring() {
  Outcome o;
  std::mt19937_64 rng(202);
  std::vector<std::string> texts;
  std::vector<Sample> samples;
  for (int i = 0; i < 10'000; ++i) {
    texts.push_back(oracle::random_ascii_text(rng, 0, 40));
    samples.emplace_back(i, texts.back(), "base");
  }
  const ScoringConfig config;  // unique_word_ratio 0.4, others 0.2
  o.require(config.weight(Feature::kUniqueWordRatio) == 0.4 &&
                config.weight(Feature::kWordCount) == 0.2 &&
                config.weight(Feature::kAvgWordLength) == 0.2 &&
                config.weight(Feature::kPunctCount) == 0.2,
            "default weights");
  const auto got = score_corpus(samples, config);
  const auto want = oracle::scores(texts, {0.2, 0.2, 0.4, 0.2}, true);
  double worst = 0;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    worst = std::max(worst, std::abs(got[i].score - want[i]));
  }
  o.require(worst <= 1e-12, "max deviation " + fmt("%.3g", worst));
  if (o.pass) o.detail = "10000 samples, max |score - naive| = " + fmt("%.3g", worst);
  return o;
}

Outcome ac3_curriculum() {
  Outcome o;
  std::mt19937_64 rng(303);
  std::vector<ComplexityScore> scores;
  for (SampleId i = 0; i < 5000; ++i) {
    ComplexityScore c;
    c.sample_id = i;
    c.score = static_cast<double>(rng() % 50) / 50.0;
    scores.push_back(c);
  }
  std::shuffle(scores.begin(), scores.end(), rng);
  std::map<SampleId, double> by_id;
  for (const auto& c : scores) by_id[c.sample_id] = c.score;
  const auto ids = sort_by_score(scores);
  for (std::size_t i = 1; i < ids.size(); ++i) {
    const double a = by_id[ids[i - 1]];
    const double b = by_id[ids[i]];
    o.require(a < b || (a == b && ids[i - 1] < ids[i]), "order violated");
  }
  std::vector<SampleId> ten(10);
  std::iota(ten.begin(), ten.end(), 0);
  const auto s = build_schedule(ten, 5, Pacing::kLinearPrefix, {});
  o.require(s.exposure == std::vector<std::uint64_t>{2, 4, 6, 8, 10}, "exposure");
  const double lr[] = {5e-5, 4e-5, 3e-5, 2e-5, 1e-5};
  for (std::size_t e = 0; e < 5; ++e) {
    o.require(std::abs(s.lr_series.at(e) - lr[e]) <= 1e-12, "lr series");
  }
  if (o.pass) o.detail = "5000-sample sort ok, exposure [2,4,6,8,10], lr [5,4,3,2,1]e-5";
  return o;
}

Outcome ac4_mixing() {
  Outcome o;
  SplitMix64 rng(404);
  std::vector<Sample> base;
  std::vector<Sample> repl;
  std::uint64_t words = 0;
  std::uint64_t max_words = 0;
  auto text_of = [](std::uint64_t n) {
    std::string t;
    for (std::uint64_t i = 0; i < n; ++i) t += i ? " w" : "w";
    return t;
  };
  SampleId id = 0;
  while (words < 1'000'000) {
    const auto n = 1 + rng.below(60);
    base.emplace_back(id++, text_of(n), "base");
    words += n;
    max_words = std::max(max_words, n);
  }
  for (std::uint64_t pool = 0; pool < 300'000;) {
    const auto n = 1 + rng.below(60);
    repl.emplace_back(id++, text_of(n), "tv");
    pool += n;
    max_words = std::max(max_words, n);
  }
  const auto before = corpus_stats(base).total_words;
  std::uint64_t worst = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const MixSpec spec{150'000, seed, "tv", {}};
    const auto r = mix(base, repl, spec);
    const auto after = corpus_stats(r.mixed).total_words;
    const auto diff = after > before ? after - before : before - after;
    worst = std::max(worst, diff);
    o.require(diff <= max_words, "conservation");
    if (seed < 5) {
      const auto again = mix(base, repl, spec);
      o.require(again.mixed == r.mixed &&
                    io::to_json(again.report).dump() == io::to_json(r.report).dump(),
                "same seed differs");
    }
  }
  if (o.pass) {
    o.detail = "100 seeds on " + std::to_string(before) + " words, worst |delta| " +
               std::to_string(worst) + " <= " + std::to_string(max_words);
  }
  return o;
}

std::string syllable_corpus(std::uint64_t seed, std::size_t max_bytes) {
  WordSource ws(seed, 400);
  std::string out;
  while (true) {
    std::string s = sentence(ws, 3 + ws.rng().below(10)) + "\n";
    if (out.size() + s.size() > max_bytes) break;
    out += s;
  }
  return out;
}

Outcome ac5_bpe() {
  Outcome o;
  std::size_t compared = 0;
  for (std::uint64_t c = 0; c < 20; ++c) {
    const auto corpus = syllable_corpus(500 + c, 10 * 1024);
    WordCounts wc;
    wc.add_text(corpus);
    for (std::size_t v : {300, 320, 500}) {
      const auto t = Tokenizer::train(wc, v);
      o.require(t.vocab_size() == v, "vocab " + std::to_string(v) + " missed on corpus " +
                                         std::to_string(c));
      o.require(t.merge_bytes() == oracle::bpe_merges(corpus, v - 256 - kSpecials),
                "merge sequence differs on corpus " + std::to_string(c));
      ++compared;
    }
  }
  WordCounts wc;
  wc.add_text(syllable_corpus(599, 10 * 1024));
  const auto t = Tokenizer::train(wc, 500);
  std::mt19937_64 rng(505);
  for (int i = 0; i < 1000; ++i) {
    std::string s;
    for (const auto& w : word_tokenize(oracle::random_utf8(rng, 50))) s += (s.empty() ? "" : " ") + w;
    o.require(t.decode(t.encode(s)) == s, "round-trip failed");
  }
  if (o.pass) {
    o.detail = std::to_string(compared) +
               " trainings match the naive reference, sizes 300/320/500 exact, 1000 round-trips";
  }
  return o;
}

Outcome ac6_fertility() {
  Outcome o;
  WordSource ws(606, 3000);
  std::vector<Sample> corpus;
  std::size_t words = 0;
  while (words < 100'000) {
    const auto n = 3 + ws.rng().below(15);
    corpus.emplace_back(corpus.size(), sentence(ws, n), "base");
    words += corpus.back().word_count();
  }
  std::map<std::size_t, double> fert;
  for (std::size_t v : {300, 320, 500}) {
    fert[v] = tokenizer_metrics(Tokenizer::train(corpus, v), corpus).fertility;
  }
  o.require(fert[500] <= fert[320] && fert[320] <= fert[300], "fertility not monotone");
  o.detail = std::to_string(words) + " words, fertility 300=" + fmt("%.4f", fert[300]) +
             " 320=" + fmt("%.4f", fert[320]) + " 500=" + fmt("%.4f", fert[500]);
  return o;
}

Outcome ac7_ngram() {
  Outcome o;
  const auto dir = oracle::temp_dir("accept_toy");
  auto config = load_config(kData / "toy_config.json");
  config.output_dir = dir;
  run_pipeline(config);

  const auto eval = io::read_json(dir / files::kEvalReport);
  const double low = eval.at("ppl_low_heldout").get<double>();
  const double high = eval.at("ppl_high").get<double>();
  o.require(low < high, "low-tercile perplexity not below high-tercile");

  const auto tok = Tokenizer::from_json(io::read_json(dir / files::kTokenizer));
  const auto schedule = schedule_from_json(io::read_json(dir / files::kSchedule));
  const auto samples = io::read_samples(dir / files::kMixed);
  std::map<SampleId, const Sample*> by_id;
  for (const auto& s : samples) by_id[s.id()] = &s;
  std::vector<std::vector<TokenId>> train;
  const std::size_t third = schedule.ordered_ids.size() / 3;
  for (std::size_t i = 0; i < third; ++i) {
    train.push_back(tok.encode(by_id.at(schedule.ordered_ids[i])->text()));
  }
  const auto model = NgramModel::train(train, tok.vocab_size(), tok.special_id("<bos>"),
                                       tok.special_id("<eos>"), 3);
  SplitMix64 rng(707);
  double worst = 0;
  for (int c = 0; c < 100; ++c) {
    std::vector<TokenId> ctx;
    if (c % 2 == 0) {
      // A context seen in training.
      const auto& seq = train[rng.below(train.size())];
      if (seq.size() >= 2) ctx.assign(seq.begin(), seq.begin() + 2);
    } else {
      ctx = {static_cast<TokenId>(rng.below(tok.vocab_size())),
             static_cast<TokenId>(rng.below(tok.vocab_size()))};
    }
    double sum = 0;
    for (TokenId w = 0; w < tok.vocab_size(); ++w) sum += model.prob(ctx, w);
    worst = std::max(worst, std::abs(sum - 1));
  }
  o.require(worst <= 1e-9, "normalization drift " + fmt("%.3g", worst));

  std::vector<std::string> texts;
  for (std::size_t i = 0; i < 200; ++i) texts.push_back(samples[i].text());
  const double uniform = perplexity(NgramModel::uniform(tok.vocab_size()), texts, tok);
  o.require(uniform == static_cast<double>(tok.vocab_size()), "uniform perplexity != V");

  if (o.pass) {
    o.detail = "max |sum p - 1| " + fmt("%.3g", worst) + ", uniform ppl = V = " +
               std::to_string(tok.vocab_size()) + ", ppl low " + fmt("%.2f", low) + " < high " +
               fmt("%.2f", high);
  }
  return o;
}

Outcome ac8_pairs() {
  Outcome o;
  WordSource ws(808, 300);
  std::vector<std::string> lines;
  for (int i = 0; i < 500; ++i) lines.push_back(sentence(ws, 4 + ws.rng().below(8)));
  WordCounts wc;
  for (const auto& l : lines) wc.add_text(l);
  const auto tok = Tokenizer::train(wc, 600);
  std::vector<std::vector<TokenId>> train;
  for (const auto& l : lines) train.push_back(tok.encode(l));
  const auto model = NgramModel::train(train, tok.vocab_size(), tok.special_id("<bos>"),
                                       tok.special_id("<eos>"), 3);

  // Bad sentences swap one word for a word made of bytes absent from training.
  std::vector<MinimalPair> pairs;
  for (std::size_t i = 0; i < 200; ++i) {
    auto words = word_tokenize(lines[i]);
    words[ws.rng().below(words.size())] = "ZXQJ";
    std::string bad;
    for (const auto& w : words) bad += (bad.empty() ? "" : " ") + w;
    if (bad != lines[i]) pairs.push_back({lines[i], bad, "unseen_token"});
  }
  const double ceiling = minimal_pair_accuracy(model, pairs, tok).accuracy;
  o.require(ceiling == 1.0, "ceiling accuracy " + fmt("%.3f", ceiling));

  std::vector<MinimalPair> shuffled;
  SplitMix64 coin(809);
  WordSource extra(810, 300);
  while (shuffled.size() < 1000) {
    const auto a = sentence(extra, 3 + extra.rng().below(10));
    const auto b = sentence(extra, 3 + extra.rng().below(10));
    if (a == b) continue;
    shuffled.push_back(coin.below(2) ? MinimalPair{a, b, "shuffled"} : MinimalPair{b, a, "shuffled"});
  }
  const double floor = minimal_pair_accuracy(NgramModel::uniform(tok.vocab_size()), shuffled,
                                             tok).accuracy;
  o.require(std::abs(floor - 0.5) <= 0.05, "shuffled accuracy " + fmt("%.3f", floor));
  if (o.pass) {
    o.detail = std::to_string(pairs.size()) + " unseen-token pairs accuracy 1.0, 1000 shuffled pairs " +
               "under uniform " + fmt("%.3f", floor);
  }
  return o;
}

std::map<std::string, std::string> run_outputs(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), dir).string();
    if (rel.rfind(files::kCacheDir, 0) == 0 || rel == files::kResolvedConfig) continue;
    out[rel] = sha256_file(e.path());
  }
  return out;
}

Outcome ac9_end_to_end() {
  Outcome o;
  const auto dir = oracle::temp_dir("accept_10m");
  {
    // 10M words of base text plus a 2M-word replacement pool.
    WordSource ws(909, 60'000);
    std::ofstream base(dir / "base.txt");
    std::size_t words = 0;
    while (words < 10'000'000) {
      const auto n = 2 + ws.rng().below(30);
      base << sentence(ws, n) << '\n';
      words += n;
    }
    WordSource tv(910, 20'000);
    std::ofstream pool(dir / "tv.txt");
    for (std::size_t w = 0; w < 2'000'000;) {
      const auto n = 2 + tv.rng().below(12);
      pool << sentence(tv, n) << '\n';
      w += n;
    }
  }
  RunConfig config;
  config.inputs = {{dir / "base.txt", InputFormat::kPlainLines, "base"},
                   {dir / "tv.txt", InputFormat::kPlainLines, "tv"}};
  config.seed = 2024;
  config.eval.pairs = kData / "toy_pairs.jsonl";

  std::vector<double> times;
  for (const char* name : {"run_a", "run_b"}) {
    config.output_dir = dir / name;
    const auto t0 = Clock::now();
    run_pipeline(config);
    times.push_back(seconds_since(t0));
    o.require(times.back() < 600, std::string(name) + " took " + fmt("%.1f s", times.back()));
  }
  const auto a = run_outputs(dir / "run_a");
  const auto b = run_outputs(dir / "run_b");
  o.require(a == b, "runs differ");
  o.require(a.count(std::string(files::kShardDir) + "/" + kManifestName) == 1, "no manifest");
  o.require(a.count(files::kTokenizer) == 1, "no tokenizer");
  if (o.pass) {
    o.detail = "two runs " + fmt("%.1f s", times[0]) + " / " + fmt("%.1f s", times[1]) + ", " +
               std::to_string(a.size()) + " output files byte-identical";
  }
  fs::remove_all(dir);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"AC1 filter exactness", ac1_filters},
      {"AC2 score oracle equivalence", ac2_scoring},
      {"AC3 curriculum ordering", ac3_curriculum},
      {"AC4 mixing conservation", ac4_mixing},
      {"AC5 BPE oracle equivalence", ac5_bpe},
      {"AC6 tokenizer fertility monotonicity", ac6_fertility},
      {"AC7 n-gram sanity", ac7_ngram},
      {"AC8 minimal-pair floor/ceiling", ac8_pairs},
      {"AC9 end-to-end determinism and throughput", ac9_end_to_end},
  };
  // Optional filter: run only criteria whose label contains argv[1].
  const std::string only = argc > 1 ? argv[1] : "";
  int failed = 0;
  for (const auto& [label, fn] : criteria) {
    if (!only.empty() && label.find(only) == std::string::npos) continue;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("threw: ") + e.what();
    }
    std::printf("[%s] %s: %s\n", o.pass ? "PASS" : "FAIL", label.c_str(), o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
