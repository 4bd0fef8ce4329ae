#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lmcurate/corpus.hpp"

namespace lmcurate {

struct MixSpec {
  std::uint64_t target_replacement_words = 1'500'000;
  std::uint64_t seed = 0;
  std::string replacement_source{source::kTv};
  // Defaults to the largest word count of any sample in either pool.
  std::optional<std::uint64_t> tolerance_words;
};

struct MixReport {
  std::vector<SampleId> removed_ids;
  std::vector<SampleId> added_ids;
  std::uint64_t removed_words = 0;
  std::uint64_t added_words = 0;
  std::uint64_t seed = 0;
  std::uint64_t tolerance_words = 0;
};

struct MixResult {
  std::vector<Sample> mixed;
  MixReport report;
};

/// Removes seeded-uniform base samples until at least the target word count is
/// gone, then adds seeded-uniform replacement samples until at least the same
/// target is added. Kept base samples retain their order; added samples follow
/// in selection order. Throws ConfigError before touching anything when a pool
/// is too small.
MixResult mix(const std::vector<Sample>& base,
              const std::vector<Sample>& replacement, const MixSpec& spec);

CorpusStats corpus_stats(const std::vector<Sample>& samples);

}  // namespace lmcurate
