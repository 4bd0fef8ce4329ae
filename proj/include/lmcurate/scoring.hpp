#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "lmcurate/corpus.hpp"

namespace lmcurate {

// The four surface features combined by the complexity score.
enum class Feature : std::size_t {
  kWordCount = 0,
  kAvgWordLength = 1,
  kUniqueWordRatio = 2,
  kPunctCount = 3,
};

inline constexpr std::size_t kFeatureCount = 4;
inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "word_count", "avg_word_length", "unique_word_ratio", "punct_count"};

Feature parse_feature(std::string_view name);

struct FeatureVector {
  double word_count = 0;
  double avg_word_length = 0;
  double unique_word_ratio = 0;
  double punct_count = 0;

  double operator[](Feature f) const;
  double& operator[](Feature f);
  std::array<double, kFeatureCount> as_array() const;

  bool operator==(const FeatureVector&) const = default;
};

FeatureVector compute_features(const Sample& sample);
FeatureVector compute_features(std::string_view text);

/// Per-feature minimum and maximum over a corpus.
class Normalizer {
 public:
  static Normalizer fit(const std::vector<FeatureVector>& features);

  double min(Feature f) const { return min_[static_cast<std::size_t>(f)]; }
  double max(Feature f) const { return max_[static_cast<std::size_t>(f)]; }
  bool is_constant(Feature f) const { return min(f) == max(f); }

  // (x - min) / (max - min), 0 for constant features.
  FeatureVector apply(const FeatureVector& raw) const;

 private:
  std::array<double, kFeatureCount> min_{};
  std::array<double, kFeatureCount> max_{};
};

struct ScoringConfig {
  // Indexed by Feature.
  std::array<double, kFeatureCount> weights = {0.2, 0.2, 0.4, 0.2};
  bool normalize = true;

  // Each weight in [0,1] and the sum within 1e-9 of 1.
  void validate() const;
  double weight(Feature f) const { return weights[static_cast<std::size_t>(f)]; }
};

struct ComplexityScore {
  SampleId sample_id = 0;
  FeatureVector raw_features;
  std::optional<FeatureVector> normalized_features;
  double score = 0;
};

ComplexityScore compute_score(SampleId id, const FeatureVector& features,
                              const Normalizer* normalizer,
                              const ScoringConfig& config);

// Features, normalizer fit and scores for a whole corpus, in input order.
std::vector<ComplexityScore> score_corpus(const std::vector<Sample>& samples,
                                          const ScoringConfig& config);

}  // namespace lmcurate
