#include "lmcurate/curriculum.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <unordered_set>

namespace lmcurate {

namespace fs = std::filesystem;
using nlohmann::json;

nlohmann::json to_json(const TrainingRecipe& r) {
  return json{{"architecture", r.architecture},
              {"model_size", r.model_size},
              {"vocab_size", r.vocab_size},
              {"batch_size", r.batch_size},
              {"base_lr", r.base_lr},
              {"weight_decay", r.weight_decay},
              {"lr_scheduler", r.lr_scheduler},
              {"decoder_layers", r.decoder_layers},
              {"attention_heads", r.attention_heads}};
}

TrainingRecipe recipe_from_json(const nlohmann::json& j) {
  TrainingRecipe r;
  r.architecture = j.value("architecture", r.architecture);
  r.model_size = j.value("model_size", r.model_size);
  r.vocab_size = j.value("vocab_size", r.vocab_size);
  r.batch_size = j.value("batch_size", r.batch_size);
  r.base_lr = j.value("base_lr", r.base_lr);
  r.weight_decay = j.value("weight_decay", r.weight_decay);
  r.lr_scheduler = j.value("lr_scheduler", r.lr_scheduler);
  r.decoder_layers = j.value("decoder_layers", r.decoder_layers);
  r.attention_heads = j.value("attention_heads", r.attention_heads);
  if (!(r.base_lr > 0)) throw ConfigError("base_lr must be positive");
  return r;
}

Pacing parse_pacing(std::string_view name) {
  if (name == "linear_prefix") return Pacing::kLinearPrefix;
  if (name == "full_each_epoch") return Pacing::kFullEachEpoch;
  throw ConfigError("unknown pacing '" + std::string(name) + "'");
}

std::string_view to_string(Pacing pacing) {
  return pacing == Pacing::kLinearPrefix ? "linear_prefix" : "full_each_epoch";
}

std::vector<SampleId> sort_by_score(const std::vector<ComplexityScore>& scores) {
  std::unordered_set<SampleId> seen;
  seen.reserve(scores.size());
  for (const auto& s : scores) {
    if (!seen.insert(s.sample_id).second) {
      throw InputError("duplicate sample id " + std::to_string(s.sample_id) +
                       " in score list");
    }
  }
  std::vector<std::pair<double, SampleId>> keyed;
  keyed.reserve(scores.size());
  for (const auto& s : scores) keyed.emplace_back(s.score, s.sample_id);
  // (score, id) is a total order once ids are unique, so the result is the
  // stable order regardless of the input permutation.
  std::sort(keyed.begin(), keyed.end());
  std::vector<SampleId> ids;
  ids.reserve(keyed.size());
  for (const auto& [score, id] : keyed) ids.push_back(id);
  return ids;
}

CurriculumSchedule build_schedule(std::vector<SampleId> ordered_ids,
                                  std::uint64_t epochs, Pacing pacing,
                                  const TrainingRecipe& recipe) {
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (ordered_ids.empty()) throw InputError("cannot schedule an empty corpus");

  CurriculumSchedule s;
  s.epochs = epochs;
  s.pacing = pacing;
  s.recipe = recipe;
  const std::uint64_t n = ordered_ids.size();
  for (std::uint64_t e = 1; e <= epochs; ++e) {
    s.exposure.push_back(pacing == Pacing::kLinearPrefix
                             ? (e * n + epochs - 1) / epochs
                             : n);
    s.lr_series.push_back(recipe.base_lr *
                          (static_cast<double>(epochs - (e - 1)) /
                           static_cast<double>(epochs)));
  }
  s.ordered_ids = std::move(ordered_ids);
  return s;
}

nlohmann::json to_json(const CurriculumSchedule& s) {
  return json{{"ordered_ids", s.ordered_ids},
              {"epochs", s.epochs},
              {"pacing", to_string(s.pacing)},
              {"exposure", s.exposure},
              {"lr_series", s.lr_series},
              {"recipe", to_json(s.recipe)}};
}

CurriculumSchedule schedule_from_json(const nlohmann::json& j) {
  CurriculumSchedule s;
  s.ordered_ids = j.at("ordered_ids").get<std::vector<SampleId>>();
  s.epochs = j.at("epochs").get<std::uint64_t>();
  s.pacing = parse_pacing(j.at("pacing").get<std::string>());
  s.exposure = j.at("exposure").get<std::vector<std::uint64_t>>();
  s.lr_series = j.at("lr_series").get<std::vector<double>>();
  s.recipe = recipe_from_json(j.value("recipe", json::object()));
  return s;
}

namespace {

std::string shard_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "shard_%05zu.jsonl", index);
  return buf;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << content;
  out.close();
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace

ShardManifest emit_shards(const std::vector<ScoredSample>& ordered,
                          const CurriculumSchedule& schedule,
                          std::uint64_t shard_size, const fs::path& sink) {
  if (shard_size < 1) throw ConfigError("shard_size must be >= 1");
  if (ordered.size() != schedule.ordered_ids.size()) {
    throw InputError("sample list and schedule disagree on corpus size");
  }

  std::error_code ec;
  fs::create_directories(sink, ec);
  if (ec) throw IoError("cannot create " + sink.string() + ": " + ec.message());
  write_file(sink / kPartialMarker, "");
  fs::remove(sink / kManifestName, ec);
  for (const auto& entry : fs::directory_iterator(sink)) {
    const auto name = entry.path().filename().string();
    if (name.starts_with("shard_") && name.ends_with(".jsonl")) fs::remove(entry.path());
  }

  ShardManifest manifest;
  for (std::size_t begin = 0; begin < ordered.size(); begin += shard_size) {
    const std::size_t end = std::min<std::size_t>(ordered.size(), begin + shard_size);
    ShardInfo info;
    info.path = shard_name(manifest.shards.size());
    info.count = end - begin;
    info.first_id = ordered[begin].sample.id();
    info.last_id = ordered[end - 1].sample.id();
    info.min_score = ordered[begin].score;
    info.max_score = ordered[begin].score;
    std::string body;
    for (std::size_t i = begin; i < end; ++i) {
      const auto& s = ordered[i];
      if (s.sample.id() != schedule.ordered_ids[i]) {
        throw InputError("sample order does not match the schedule at position " +
                         std::to_string(i));
      }
      info.min_score = std::min(info.min_score, s.score);
      info.max_score = std::max(info.max_score, s.score);
      body += json{{"id", s.sample.id()},
                   {"text", s.sample.text()},
                   {"source", s.sample.source()},
                   {"score", s.score}}
                  .dump();
      body += '\n';
    }
    write_file(sink / info.path, body);
    manifest.shards.push_back(std::move(info));
  }

  for (std::size_t e = 0; e < schedule.exposure.size(); ++e) {
    const std::uint64_t prefix = schedule.exposure[e];
    ExposureBoundary b{e + 1, prefix, 0, 0};
    if (prefix > 0) {
      b.shard = (prefix - 1) / shard_size;
      b.offset = (prefix - 1) % shard_size + 1;
    }
    manifest.boundaries.push_back(b);
  }

  json shards = json::array();
  for (const auto& s : manifest.shards) {
    shards.push_back({{"path", s.path},
                      {"count", s.count},
                      {"first_id", s.first_id},
                      {"last_id", s.last_id},
                      {"min_score", s.min_score},
                      {"max_score", s.max_score}});
  }
  json boundaries = json::array();
  for (const auto& b : manifest.boundaries) {
    boundaries.push_back({{"epoch", b.epoch},
                          {"prefix", b.prefix},
                          {"shard", b.shard},
                          {"offset", b.offset}});
  }
  manifest.document = json{
      {"shards", shards},
      {"sample_count", ordered.size()},
      {"shard_size", shard_size},
      {"epochs", schedule.epochs},
      {"pacing", to_string(schedule.pacing)},
      {"exposure", schedule.exposure},
      {"exposure_boundaries", boundaries},
      {"lr_series", schedule.lr_series},
      {"lr_endpoint", schedule.lr_series.empty() ? 0.0 : schedule.lr_series.back()},
      {"within_prefix_order", "sorted"},
      {"recipe", to_json(schedule.recipe)}};

  const fs::path tmp = sink / (std::string(kManifestName) + ".tmp");
  write_file(tmp, manifest.document.dump(2) + "\n");
  fs::rename(tmp, sink / kManifestName);
  fs::remove(sink / kPartialMarker);
  return manifest;
}

std::vector<ScoredSample> read_shards(const fs::path& dir) {
  if (fs::exists(dir / kPartialMarker)) {
    throw InputError(dir.string() + " holds a partial shard emission");
  }
  std::ifstream in(dir / kManifestName);
  if (!in) throw InputError("missing manifest in " + dir.string());
  const json manifest = json::parse(in);
  std::vector<ScoredSample> out;
  for (const auto& shard : manifest.at("shards")) {
    std::ifstream sf(dir / shard.at("path").get<std::string>());
    if (!sf) throw InputError("missing shard " + shard.at("path").get<std::string>());
    std::string line;
    while (std::getline(sf, line)) {
      if (line.empty()) continue;
      const json r = json::parse(line);
      out.push_back({Sample(r.at("id").get<SampleId>(), r.at("text").get<std::string>(),
                            r.at("source").get<std::string>()),
                     r.at("score").get<double>()});
    }
  }
  return out;
}

}  // namespace lmcurate
