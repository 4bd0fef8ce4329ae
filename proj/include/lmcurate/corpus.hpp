#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lmcurate {

using SampleId = std::uint64_t;

// Error hierarchy shared by every stage. The CLI maps these onto exit codes.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed UTF-8; offset is the byte position of the first bad sequence.
class DecodeError : public InputError {
 public:
  DecodeError(std::uint64_t offset, const std::string& what)
      : InputError(what), offset_(offset) {}
  std::uint64_t offset() const { return offset_; }

 private:
  std::uint64_t offset_;
};

// A record that cannot be turned into a sample; line is 1-based.
class RecordError : public InputError {
 public:
  RecordError(std::uint64_t line, const std::string& what)
      : InputError(what), line_(line) {}
  std::uint64_t line() const { return line_; }

 private:
  std::uint64_t line_;
};

namespace source {
inline constexpr std::string_view kBase = "base";
inline constexpr std::string_view kTv = "tv";
}  // namespace source

/// One text unit. Surface statistics are computed once at construction so
/// downstream stages never re-scan the text for counts.
class Sample {
 public:
  Sample() = default;
  Sample(SampleId id, std::string text, std::string source);

  SampleId id() const { return id_; }
  const std::string& text() const { return text_; }
  const std::string& source() const { return source_; }
  std::size_t char_count() const { return char_count_; }
  std::size_t word_count() const { return word_count_; }
  std::size_t punct_count() const { return punct_count_; }

  // Materialized on demand; equals word_tokenize(text()).
  std::vector<std::string> words() const;

  bool operator==(const Sample&) const = default;

 private:
  SampleId id_ = 0;
  std::string text_;
  std::string source_;
  std::size_t char_count_ = 0;
  std::size_t word_count_ = 0;
  std::size_t punct_count_ = 0;
};

struct CorpusStats {
  std::uint64_t sample_count = 0;
  std::uint64_t total_words = 0;
  std::map<std::string, std::uint64_t> words_by_source;
  std::uint64_t duplicate_count = 0;
};

enum class InputFormat { kJsonl, kPlainLines };

InputFormat parse_input_format(std::string_view name);
std::string_view to_string(InputFormat format);

struct IngestResult {
  std::vector<Sample> samples;
  std::uint64_t skipped_empty = 0;
};

/// Reads every record of `in`. Ids start at `first_id` and increase by one per
/// kept record. Throws DecodeError / RecordError and returns nothing on any
/// malformed input.
IngestResult ingest(std::istream& in, InputFormat format,
                    std::string_view source, SampleId first_id = 0);

// Maximal runs of non-whitespace scalars (Unicode White_Space property).
std::vector<std::string> word_tokenize(std::string_view text);
std::vector<std::string_view> word_views(std::string_view text);
std::size_t count_words(std::string_view text);

// Scalars whose general category is one of Pc Pd Pe Pf Pi Po Ps.
std::size_t count_punctuation(std::string_view text);

// Number of Unicode scalar values; text must be valid UTF-8.
std::size_t count_scalars(std::string_view text);

// Offset of the first invalid byte, or npos when `bytes` is valid UTF-8.
std::size_t find_invalid_utf8(std::string_view bytes);

std::string_view trim_whitespace(std::string_view text);

}  // namespace lmcurate
