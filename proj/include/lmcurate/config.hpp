#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lmcurate/corpus.hpp"
#include "lmcurate/curriculum.hpp"
#include "lmcurate/filters.hpp"
#include "lmcurate/mixing.hpp"
#include "lmcurate/scoring.hpp"
#include "lmcurate/tokenizer.hpp"

namespace lmcurate {

struct InputSpec {
  std::filesystem::path path;
  InputFormat format = InputFormat::kJsonl;
  std::string source{source::kBase};
};

struct EvalConfig {
  bool enabled = true;
  std::size_t order = 3;
  double discount = 0.75;
  // Cap on low-tercile samples used to train the evaluator.
  std::size_t max_train_samples = 50'000;
  // Fraction of the low tercile held out for evaluation.
  double heldout_fraction = 0.1;
  std::optional<std::filesystem::path> pairs;
};

/// Everything a pipeline run depends on. Parsing fills defaults for every
/// missing key; to_json() always writes the fully resolved form.
struct RunConfig {
  std::vector<InputSpec> inputs;
  FilterConfig filter;
  bool filter_replacement = true;
  ScoringConfig scoring;
  std::uint64_t target_replacement_words = 1'500'000;
  std::string replacement_source{source::kTv};
  std::optional<std::uint64_t> tolerance_words;
  std::size_t vocab_size = 32'000;
  std::vector<std::string> specials = kDefaultSpecials;
  std::uint64_t epochs = 5;
  Pacing pacing = Pacing::kLinearPrefix;
  std::uint64_t shard_size = 10'000;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "out";
  TrainingRecipe recipe;
  EvalConfig eval;

  // Throws ConfigError describing the first invalid field.
  void validate() const;

  MixSpec mix_spec() const;
};

nlohmann::json to_json(const RunConfig& config);

/// Unknown keys are rejected. Relative input paths resolve against
/// `base_dir` when given.
RunConfig config_from_json(const nlohmann::json& j,
                           const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

nlohmann::json to_json(const FilterConfig& c);
FilterConfig filter_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ScoringConfig& c);
ScoringConfig scoring_config_from_json(const nlohmann::json& j);

}  // namespace lmcurate
