#include "lmcurate/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace lmcurate::io {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <typename Fn>
void for_each_line(const fs::path& path, Fn&& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path.string());
  std::string line;
  std::uint64_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
      fn(j);
    } catch (const json::exception& e) {
      throw RecordError(n, path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
}

}  // namespace

void write_text(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create " + path.parent_path().string() + ": " + ec.message());
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out << content;
    out.close();
    if (!out) throw IoError("failed writing " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move " + tmp.string() + " into place: " + ec.message());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_json(const fs::path& path, const json& doc) { write_text(path, doc.dump(2) + "\n"); }

json read_json(const fs::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw InputError(path.string() + " is not valid JSON: " + e.what());
  }
}

void write_samples(const fs::path& path, const std::vector<Sample>& samples) {
  std::string body;
  for (const auto& s : samples) {
    body += json{{"id", s.id()}, {"text", s.text()}, {"source", s.source()}}.dump();
    body += '\n';
  }
  write_text(path, body);
}

std::vector<Sample> read_samples(const fs::path& path) {
  std::vector<Sample> out;
  for_each_line(path, [&](const json& j) {
    out.emplace_back(j.at("id").get<SampleId>(), j.at("text").get<std::string>(),
                     j.value("source", std::string(source::kBase)));
  });
  return out;
}

void write_rejections(const fs::path& path, const std::vector<RejectionRecord>& records) {
  std::string body;
  for (const auto& r : records) {
    json j{{"id", r.sample_id}, {"reason", to_string(r.reason)}};
    if (std::isinf(r.value)) {
      j["value"] = "inf";
    } else if (r.reason == RejectReason::kPunctRatio) {
      j["value"] = r.value;
    } else {
      j["value"] = static_cast<std::uint64_t>(r.value);
    }
    body += j.dump();
    body += '\n';
  }
  write_text(path, body);
}

std::vector<RejectionRecord> read_rejections(const fs::path& path) {
  std::vector<RejectionRecord> out;
  for_each_line(path, [&](const json& j) {
    RejectionRecord r;
    r.sample_id = j.at("id").get<SampleId>();
    const auto reason = j.at("reason").get<std::string>();
    if (reason == "duplicate") {
      r.reason = RejectReason::kDuplicate;
    } else if (reason == "too_short") {
      r.reason = RejectReason::kTooShort;
    } else if (reason == "punct_ratio") {
      r.reason = RejectReason::kPunctRatio;
    } else {
      throw InputError("unknown rejection reason '" + reason + "'");
    }
    const auto& v = j.at("value");
    r.value = v.is_string() ? std::numeric_limits<double>::infinity() : v.get<double>();
    out.push_back(r);
  });
  return out;
}

json to_json(const FeatureVector& fv) {
  json j = json::object();
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    j[std::string(kFeatureNames[i])] = fv[static_cast<Feature>(i)];
  }
  return j;
}

FeatureVector features_from_json(const json& j) {
  FeatureVector fv;
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    fv[static_cast<Feature>(i)] = j.at(std::string(kFeatureNames[i])).get<double>();
  }
  return fv;
}

void write_scores(const fs::path& path, const std::vector<ComplexityScore>& scores) {
  std::string body;
  for (const auto& s : scores) {
    json j{{"id", s.sample_id}, {"score", s.score}, {"features", to_json(s.raw_features)}};
    if (s.normalized_features) j["normalized"] = to_json(*s.normalized_features);
    body += j.dump();
    body += '\n';
  }
  write_text(path, body);
}

std::vector<ComplexityScore> read_scores(const fs::path& path) {
  std::vector<ComplexityScore> out;
  for_each_line(path, [&](const json& j) {
    ComplexityScore s;
    s.sample_id = j.at("id").get<SampleId>();
    s.score = j.at("score").get<double>();
    s.raw_features = features_from_json(j.at("features"));
    if (j.contains("normalized")) s.normalized_features = features_from_json(j["normalized"]);
    out.push_back(s);
  });
  return out;
}

json to_json(const CorpusStats& stats) {
  return {{"sample_count", stats.sample_count},
          {"total_words", stats.total_words},
          {"words_by_source", stats.words_by_source},
          {"duplicate_count", stats.duplicate_count}};
}

CorpusStats stats_from_json(const json& j) {
  CorpusStats s;
  s.sample_count = j.value("sample_count", std::uint64_t{0});
  s.total_words = j.value("total_words", std::uint64_t{0});
  s.words_by_source =
      j.value("words_by_source", std::map<std::string, std::uint64_t>{});
  s.duplicate_count = j.value("duplicate_count", std::uint64_t{0});
  return s;
}

json to_json(const MixReport& r) {
  return {{"removed_ids", r.removed_ids},   {"added_ids", r.added_ids},
          {"removed_words", r.removed_words}, {"added_words", r.added_words},
          {"seed", r.seed},                 {"tolerance_words", r.tolerance_words}};
}

std::vector<MinimalPair> read_pairs(const fs::path& path) {
  std::vector<MinimalPair> out;
  for_each_line(path, [&](const json& j) {
    out.push_back({j.at("good").get<std::string>(), j.at("bad").get<std::string>(),
                   j.value("phenomenon", std::string("unlabelled"))});
  });
  return out;
}

}  // namespace lmcurate::io
