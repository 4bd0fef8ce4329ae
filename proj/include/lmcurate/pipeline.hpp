#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "lmcurate/config.hpp"
#include "lmcurate/tokenizer.hpp"

namespace lmcurate {

// Process exit codes shared by the CLI and the stage runner.
enum class ExitCode : int { kOk = 0, kConfig = 2, kInput = 3, kStage = 4 };

ExitCode classify(const std::exception& e);

class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, ExitCode code, const std::string& what)
      : std::runtime_error("stage '" + stage + "' failed: " + what),
        stage_(std::move(stage)),
        code_(code) {}
  const std::string& stage() const { return stage_; }
  ExitCode code() const { return code_; }

 private:
  std::string stage_;
  ExitCode code_;
};

// Output file names inside a run directory.
namespace files {
inline constexpr const char* kResolvedConfig = "config.resolved.json";
inline constexpr const char* kSamples = "samples.jsonl";
inline constexpr const char* kIngestReport = "ingest_report.json";
inline constexpr const char* kFiltered = "filtered.jsonl";
inline constexpr const char* kRejections = "rejections.jsonl";
inline constexpr const char* kFilterReport = "filter_report.json";
inline constexpr const char* kMixed = "mixed.jsonl";
inline constexpr const char* kMixReport = "mix_report.json";
inline constexpr const char* kScores = "scores.jsonl";
inline constexpr const char* kScoreReport = "score_report.json";
inline constexpr const char* kOrder = "order.json";
inline constexpr const char* kSchedule = "schedule.json";
inline constexpr const char* kTokenizer = "tokenizer.json";
inline constexpr const char* kTokenizerReport = "tokenizer_report.json";
inline constexpr const char* kShardDir = "shards";
inline constexpr const char* kEvalReport = "eval_report.json";
inline constexpr const char* kPipelineReport = "pipeline_report.json";
inline constexpr const char* kCacheDir = ".cache";
inline constexpr const char* kLock = ".lock";
}  // namespace files

struct PipelineReport {
  nlohmann::json document;
  std::vector<std::string> recomputed;
  std::vector<std::string> cached;
};

/// ingest -> filter -> mix -> score -> sort -> schedule -> tokenize -> shard
/// -> eval. Each stage is skipped when its cache record matches the content
/// hash of its inputs and parameters and its outputs are intact; once one
/// stage runs, every later stage runs too. Throws ConfigError before any work
/// for an invalid config and StageError naming the failing stage otherwise.
PipelineReport run_pipeline(const RunConfig& config);

// Exclusive lock on a run directory; a second holder fails with IoError.
class RunLock {
 public:
  explicit RunLock(const std::filesystem::path& dir);
  ~RunLock();
  RunLock(const RunLock&) = delete;
  RunLock& operator=(const RunLock&) = delete;

 private:
  std::filesystem::path path_;
};

// Individual stage bodies; the CLI subcommands call these directly. Each
// fills its output containers and returns the stage's JSON report.
nlohmann::json ingest_files(const std::vector<InputSpec>& inputs, std::vector<Sample>& samples);

struct FilterStageOptions {
  FilterConfig filter;
  bool filter_replacement = true;
  std::string replacement_source{source::kTv};
};
nlohmann::json filter_samples(const std::vector<Sample>& samples,
                              const FilterStageOptions& options,
                              std::vector<Sample>& kept,
                              std::vector<RejectionRecord>& rejected);

nlohmann::json mix_samples(const std::vector<Sample>& samples, const MixSpec& spec,
                           std::vector<Sample>& mixed);

nlohmann::json score_report(const std::vector<ComplexityScore>& scores,
                            const ScoringConfig& config);

struct EvalOptions {
  EvalConfig eval;
  std::uint64_t seed = 0;
};
nlohmann::json evaluate_curriculum(const std::vector<Sample>& samples,
                                   const std::vector<SampleId>& ordered_ids,
                                   const Tokenizer& tokenizer, const EvalOptions& options);

nlohmann::json tokenizer_report(const Tokenizer& tokenizer, const std::vector<Sample>& corpus);

// Quantiles 0, 0.1, 0.25, 0.5, 0.75, 0.9, 1 (nearest rank).
nlohmann::json quantiles(std::vector<double> values);

/// Summary of whatever reports are found. Each path is a report file or a run
/// directory; a named file that does not exist is an InputError.
nlohmann::json summarize_reports(const std::vector<std::filesystem::path>& paths);
std::string render_summary(const nlohmann::json& summary);

}  // namespace lmcurate
