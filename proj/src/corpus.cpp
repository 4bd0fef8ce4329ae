#include "lmcurate/corpus.hpp"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <json.hpp>

#include <iterator>

namespace lmcurate {

namespace {

// Decodes the scalar starting at `i` and advances `i`. Input is assumed valid;
// invalid sequences decode to a negative value and still advance.
inline UChar32 next_scalar(std::string_view text, std::int64_t& i) {
  const auto* s = reinterpret_cast<const std::uint8_t*>(text.data());
  const auto length = static_cast<std::int64_t>(text.size());
  UChar32 c;
  U8_NEXT(s, i, length, c);
  return c;
}

inline bool is_space(UChar32 c) {
  if (c < 0x80) return c == ' ' || (c >= '\t' && c <= '\r');
  return c >= 0 && u_isUWhiteSpace(c);
}

inline bool is_punct(UChar32 c) {
  if (c < 0) return false;
  return u_ispunct(c) != 0;
}

template <typename Fn>
void for_each_word(std::string_view text, Fn&& fn) {
  std::int64_t i = 0;
  const auto n = static_cast<std::int64_t>(text.size());
  std::int64_t start = -1;
  while (i < n) {
    const std::int64_t at = i;
    const UChar32 c = next_scalar(text, i);
    if (is_space(c)) {
      if (start >= 0) {
        fn(text.substr(start, at - start));
        start = -1;
      }
    } else if (start < 0) {
      start = at;
    }
  }
  if (start >= 0) fn(text.substr(start));
}

}  // namespace

Sample::Sample(SampleId id, std::string text, std::string source)
    : id_(id), text_(std::move(text)), source_(std::move(source)) {
  char_count_ = count_scalars(text_);
  word_count_ = count_words(text_);
  punct_count_ = count_punctuation(text_);
}

std::vector<std::string> Sample::words() const { return word_tokenize(text_); }

InputFormat parse_input_format(std::string_view name) {
  if (name == "jsonl") return InputFormat::kJsonl;
  if (name == "plain_lines" || name == "plain") return InputFormat::kPlainLines;
  throw ConfigError("unknown input format '" + std::string(name) + "'");
}

std::string_view to_string(InputFormat format) {
  return format == InputFormat::kJsonl ? "jsonl" : "plain_lines";
}

std::vector<std::string> word_tokenize(std::string_view text) {
  std::vector<std::string> out;
  for_each_word(text, [&](std::string_view w) { out.emplace_back(w); });
  return out;
}

std::vector<std::string_view> word_views(std::string_view text) {
  std::vector<std::string_view> out;
  for_each_word(text, [&](std::string_view w) { out.push_back(w); });
  return out;
}

std::size_t count_words(std::string_view text) {
  std::size_t n = 0;
  for_each_word(text, [&](std::string_view) { ++n; });
  return n;
}

std::size_t count_punctuation(std::string_view text) {
  std::size_t n = 0;
  std::int64_t i = 0;
  const auto size = static_cast<std::int64_t>(text.size());
  while (i < size) {
    if (is_punct(next_scalar(text, i))) ++n;
  }
  return n;
}

std::size_t count_scalars(std::string_view text) {
  std::size_t n = 0;
  for (unsigned char b : text) {
    if ((b & 0xC0) != 0x80) ++n;
  }
  return n;
}

std::size_t find_invalid_utf8(std::string_view bytes) {
  std::int64_t i = 0;
  const auto n = static_cast<std::int64_t>(bytes.size());
  while (i < n) {
    if (static_cast<unsigned char>(bytes[i]) < 0x80) {
      ++i;
      continue;
    }
    const std::int64_t at = i;
    if (next_scalar(bytes, i) < 0) return static_cast<std::size_t>(at);
  }
  return std::string_view::npos;
}

std::string_view trim_whitespace(std::string_view text) {
  std::size_t begin = text.size();
  std::size_t end = 0;
  std::int64_t i = 0;
  const auto n = static_cast<std::int64_t>(text.size());
  while (i < n) {
    const std::int64_t at = i;
    if (!is_space(next_scalar(text, i))) {
      if (begin == text.size()) begin = static_cast<std::size_t>(at);
      end = static_cast<std::size_t>(i);
    }
  }
  if (begin == text.size()) return {};
  return text.substr(begin, end - begin);
}

IngestResult ingest(std::istream& in, InputFormat format,
                    std::string_view source, SampleId first_id) {
  const std::string bytes{std::istreambuf_iterator<char>(in),
                          std::istreambuf_iterator<char>()};
  if (const auto bad = find_invalid_utf8(bytes); bad != std::string::npos) {
    throw DecodeError(bad, "malformed UTF-8 at byte offset " +
                               std::to_string(bad));
  }

  IngestResult result;
  SampleId next_id = first_id;
  std::uint64_t line_no = 0;
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    std::size_t eol = bytes.find('\n', pos);
    if (eol == std::string::npos) eol = bytes.size();
    std::string_view line(bytes.data() + pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    // A CRLF ending is still just the newline.
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    std::string text;
    std::string tag(source);
    if (format == InputFormat::kPlainLines) {
      text.assign(line);
    } else {
      if (trim_whitespace(line).empty()) {
        ++result.skipped_empty;
        continue;
      }
      nlohmann::json record;
      try {
        record = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception& e) {
        throw RecordError(line_no, "line " + std::to_string(line_no) +
                                       ": invalid JSON (" + e.what() + ")");
      }
      if (!record.is_object() || !record.contains("text") ||
          !record["text"].is_string()) {
        throw RecordError(line_no, "line " + std::to_string(line_no) +
                                       ": missing string field \"text\"");
      }
      text = record["text"].get<std::string>();
      if (auto it = record.find("source"); it != record.end()) {
        if (!it->is_string()) {
          throw RecordError(line_no, "line " + std::to_string(line_no) +
                                         ": \"source\" must be a string");
        }
        tag = it->get<std::string>();
      }
    }
    if (trim_whitespace(text).empty()) {
      ++result.skipped_empty;
      continue;
    }
    result.samples.emplace_back(next_id++, std::move(text), std::move(tag));
  }
  return result;
}

}  // namespace lmcurate
