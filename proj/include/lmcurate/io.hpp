#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "lmcurate/corpus.hpp"
#include "lmcurate/filters.hpp"
#include "lmcurate/mixing.hpp"
#include "lmcurate/ngram.hpp"
#include "lmcurate/scoring.hpp"

// File formats exchanged between stages. Every writer goes through a temporary
// file and a rename, so a reader never sees a half-written file.
namespace lmcurate::io {

void write_text(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);

void write_json(const std::filesystem::path& path, const nlohmann::json& doc);
nlohmann::json read_json(const std::filesystem::path& path);

// {"id":…, "text":…, "source":…} per line; ids are preserved.
void write_samples(const std::filesystem::path& path, const std::vector<Sample>& samples);
std::vector<Sample> read_samples(const std::filesystem::path& path);

// {"id":…, "reason":…, "value":…} per line.
void write_rejections(const std::filesystem::path& path,
                      const std::vector<RejectionRecord>& records);
std::vector<RejectionRecord> read_rejections(const std::filesystem::path& path);

// {"id":…, "score":…, "features":{…}, "normalized":{…}} per line.
void write_scores(const std::filesystem::path& path, const std::vector<ComplexityScore>& scores);
std::vector<ComplexityScore> read_scores(const std::filesystem::path& path);

nlohmann::json to_json(const CorpusStats& stats);
CorpusStats stats_from_json(const nlohmann::json& j);
nlohmann::json to_json(const MixReport& report);
nlohmann::json to_json(const FeatureVector& fv);
FeatureVector features_from_json(const nlohmann::json& j);

// {"good":…, "bad":…, "phenomenon":…} per line.
std::vector<MinimalPair> read_pairs(const std::filesystem::path& path);

}  // namespace lmcurate::io
