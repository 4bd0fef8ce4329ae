#include "lmcurate/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_set>

namespace lmcurate {

Feature parse_feature(std::string_view name) {
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    if (kFeatureNames[i] == name) return static_cast<Feature>(i);
  }
  throw ConfigError("unknown feature '" + std::string(name) + "'");
}

double FeatureVector::operator[](Feature f) const {
  return const_cast<FeatureVector&>(*this)[f];
}

double& FeatureVector::operator[](Feature f) {
  switch (f) {
    case Feature::kWordCount: return word_count;
    case Feature::kAvgWordLength: return avg_word_length;
    case Feature::kUniqueWordRatio: return unique_word_ratio;
    case Feature::kPunctCount: return punct_count;
  }
  return word_count;
}

std::array<double, kFeatureCount> FeatureVector::as_array() const {
  return {word_count, avg_word_length, unique_word_ratio, punct_count};
}

FeatureVector compute_features(std::string_view text) {
  FeatureVector fv;
  const auto words = word_views(text);
  fv.punct_count = static_cast<double>(count_punctuation(text));
  if (words.empty()) return fv;

  std::size_t letters = 0;
  std::unordered_set<std::string_view> distinct;
  distinct.reserve(words.size());
  for (auto w : words) {
    letters += count_scalars(w);
    distinct.insert(w);
  }
  const auto n = static_cast<double>(words.size());
  fv.word_count = n;
  fv.avg_word_length = static_cast<double>(letters) / n;
  fv.unique_word_ratio = static_cast<double>(distinct.size()) / n;
  return fv;
}

FeatureVector compute_features(const Sample& sample) {
  return compute_features(sample.text());
}

Normalizer Normalizer::fit(const std::vector<FeatureVector>& features) {
  if (features.empty()) throw InputError("cannot fit a normalizer on an empty corpus");
  Normalizer n;
  n.min_ = features.front().as_array();
  n.max_ = n.min_;
  for (const auto& fv : features) {
    const auto a = fv.as_array();
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
      n.min_[i] = std::min(n.min_[i], a[i]);
      n.max_[i] = std::max(n.max_[i], a[i]);
    }
  }
  return n;
}

FeatureVector Normalizer::apply(const FeatureVector& raw) const {
  FeatureVector out;
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    const auto f = static_cast<Feature>(i);
    out[f] = is_constant(f) ? 0.0 : (raw[f] - min_[i]) / (max_[i] - min_[i]);
  }
  return out;
}

void ScoringConfig::validate() const {
  double sum = 0;
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    const double w = weights[i];
    if (!(w >= 0.0 && w <= 1.0)) {
      throw ConfigError("weight for " + std::string(kFeatureNames[i]) +
                        " must lie in [0,1]");
    }
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ConfigError("scoring weights must sum to 1 (got " + std::to_string(sum) + ")");
  }
}

ComplexityScore compute_score(SampleId id, const FeatureVector& features,
                              const Normalizer* normalizer,
                              const ScoringConfig& config) {
  config.validate();
  ComplexityScore out;
  out.sample_id = id;
  out.raw_features = features;
  const FeatureVector* used = &features;
  if (config.normalize) {
    if (normalizer == nullptr) {
      throw ConfigError("normalized scoring requires a fitted normalizer");
    }
    out.normalized_features = normalizer->apply(features);
    used = &*out.normalized_features;
  }
  double score = 0;
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    score += config.weights[i] * (*used)[static_cast<Feature>(i)];
  }
  // Rounding in the weighted sum can step a hair outside the unit interval.
  out.score = config.normalize ? std::clamp(score, 0.0, 1.0) : score;
  return out;
}

std::vector<ComplexityScore> score_corpus(const std::vector<Sample>& samples,
                                          const ScoringConfig& config) {
  config.validate();
  std::vector<FeatureVector> features;
  features.reserve(samples.size());
  for (const auto& s : samples) features.push_back(compute_features(s));

  std::optional<Normalizer> normalizer;
  if (config.normalize && !features.empty()) normalizer = Normalizer::fit(features);

  std::vector<ComplexityScore> scores;
  scores.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    scores.push_back(compute_score(samples[i].id(), features[i],
                                   normalizer ? &*normalizer : nullptr, config));
  }
  return scores;
}

}  // namespace lmcurate
