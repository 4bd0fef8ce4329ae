#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "lmcurate/corpus.hpp"
#include "lmcurate/scoring.hpp"

namespace lmcurate {

// Hyperparameters of the decoder the schedule is emitted for. The pipeline
// only records these; it does not train a model.
struct TrainingRecipe {
  std::string architecture = "SmolLM";
  std::string model_size = "125M";
  std::uint64_t vocab_size = 32'000;
  std::uint64_t batch_size = 32;
  double base_lr = 5e-5;
  double weight_decay = 0.015;
  std::string lr_scheduler = "linear";
  std::uint64_t decoder_layers = 30;
  std::uint64_t attention_heads = 9;
};

nlohmann::json to_json(const TrainingRecipe& recipe);
TrainingRecipe recipe_from_json(const nlohmann::json& j);

enum class Pacing { kLinearPrefix, kFullEachEpoch };

Pacing parse_pacing(std::string_view name);
std::string_view to_string(Pacing pacing);

struct CurriculumSchedule {
  std::vector<SampleId> ordered_ids;
  std::uint64_t epochs = 5;
  Pacing pacing = Pacing::kLinearPrefix;
  // exposure[e] = prefix length of ordered_ids seen in epoch e+1.
  std::vector<std::uint64_t> exposure;
  std::vector<double> lr_series;
  TrainingRecipe recipe;
};

/// Stable ascending sort by score, ties by ascending id. Throws InputError on
/// duplicate sample ids.
std::vector<SampleId> sort_by_score(const std::vector<ComplexityScore>& scores);

CurriculumSchedule build_schedule(std::vector<SampleId> ordered_ids,
                                  std::uint64_t epochs, Pacing pacing,
                                  const TrainingRecipe& recipe);

struct ScoredSample {
  Sample sample;
  double score = 0;
};

struct ShardInfo {
  std::string path;  // relative to the manifest directory
  std::uint64_t count = 0;
  SampleId first_id = 0;
  SampleId last_id = 0;
  double min_score = 0;
  double max_score = 0;
};

// End of an epoch's exposed prefix: the first `offset` samples of `shard`.
struct ExposureBoundary {
  std::uint64_t epoch = 0;
  std::uint64_t prefix = 0;
  std::uint64_t shard = 0;
  std::uint64_t offset = 0;
};

struct ShardManifest {
  std::vector<ShardInfo> shards;
  std::vector<ExposureBoundary> boundaries;
  nlohmann::json document;
};

inline constexpr const char* kManifestName = "manifest.json";
inline constexpr const char* kPartialMarker = ".partial";

/// Writes `ordered` (curriculum order) into shard_NNNNN.jsonl files of at most
/// `shard_size` samples, then the manifest. A ".partial" marker exists for the
/// whole duration of the write and is removed only after the manifest is in
/// place.
ShardManifest emit_shards(const std::vector<ScoredSample>& ordered,
                          const CurriculumSchedule& schedule,
                          std::uint64_t shard_size,
                          const std::filesystem::path& sink);

// Reads a manifest and its shards back in manifest order.
std::vector<ScoredSample> read_shards(const std::filesystem::path& dir);

nlohmann::json to_json(const CurriculumSchedule& schedule);
CurriculumSchedule schedule_from_json(const nlohmann::json& j);

}  // namespace lmcurate
