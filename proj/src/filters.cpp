#include "lmcurate/filters.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "lmcurate/mixing.hpp"

namespace lmcurate {

Ratio Ratio::parse_decimal(std::string_view text) {
  std::uint64_t num = 0;
  std::uint64_t den = 1;
  bool seen_point = false;
  bool seen_digit = false;
  for (char c : text) {
    if (c == '.' && !seen_point) {
      seen_point = true;
      continue;
    }
    if (c < '0' || c > '9') {
      throw ConfigError("not a non-negative decimal: '" + std::string(text) + "'");
    }
    seen_digit = true;
    if (num > 100'000'000'000'000'000ULL || den > 100'000'000'000'000'000ULL) {
      throw ConfigError("decimal has too many digits: '" + std::string(text) + "'");
    }
    num = num * 10 + static_cast<std::uint64_t>(c - '0');
    if (seen_point) den *= 10;
  }
  if (!seen_digit) {
    throw ConfigError("not a non-negative decimal: '" + std::string(text) + "'");
  }
  const std::uint64_t g = std::gcd(num, den);
  return num == 0 ? Ratio{0, 1} : Ratio{num / g, den / g};
}

Ratio Ratio::from_double(double v) {
  if (!std::isfinite(v) || v < 0) {
    throw ConfigError("ratio must be a finite non-negative number");
  }
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed);
  if (ec != std::errc{}) throw ConfigError("cannot represent ratio");
  return parse_decimal(std::string_view(buf, end - buf));
}

std::string Ratio::to_decimal() const {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value());
  return std::string(buf, end);
}

void FilterConfig::validate() const {
  if (max_punct_ratio.den == 0) throw ConfigError("max_punct_ratio has zero denominator");
}

std::string_view to_string(RejectReason reason) {
  switch (reason) {
    case RejectReason::kDuplicate: return "duplicate";
    case RejectReason::kPunctRatio: return "punct_ratio";
    case RejectReason::kTooShort: return "too_short";
  }
  return "unknown";
}

DedupResult dedup(const std::vector<Sample>& samples, bool trim) {
  DedupResult out;
  std::unordered_map<std::string_view, SampleId> seen;
  seen.reserve(samples.size());
  for (const auto& s : samples) {
    const std::string_view key = trim ? trim_whitespace(s.text()) : std::string_view(s.text());
    auto [it, inserted] = seen.try_emplace(key, s.id());
    if (inserted) {
      out.kept.push_back(s);
    } else {
      out.rejected.push_back({s.id(), RejectReason::kDuplicate,
                              static_cast<double>(it->second)});
    }
  }
  return out;
}

double punctuation_ratio(const Sample& sample) {
  const auto punct = sample.punct_count();
  const auto words = sample.word_count();
  if (words == 0) {
    return punct == 0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return static_cast<double>(punct) / static_cast<double>(words);
}

bool exceeds_punct_ratio(std::size_t punct, std::size_t words, const Ratio& limit) {
  if (words == 0) return punct > 0;
  // punct / words > num / den  <=>  punct * den > words * num
  const auto lhs = static_cast<unsigned __int128>(punct) * limit.den;
  const auto rhs = static_cast<unsigned __int128>(words) * limit.num;
  return lhs > rhs;
}

FilterResult apply_filters(const std::vector<Sample>& samples,
                           const FilterConfig& config) {
  config.validate();
  FilterResult out;

  std::vector<Sample> unique;
  const std::vector<Sample>* stage = &samples;
  if (config.dedup_enabled) {
    auto d = dedup(samples, config.dedup_trim);
    unique = std::move(d.kept);
    out.rejected = std::move(d.rejected);
    stage = &unique;
  }
  out.stats.duplicate_count = out.rejected.size();

  out.kept.reserve(stage->size());
  for (const auto& s : *stage) {
    if (s.char_count() < config.min_chars) {
      out.rejected.push_back({s.id(), RejectReason::kTooShort,
                              static_cast<double>(s.char_count())});
    } else if (exceeds_punct_ratio(s.punct_count(), s.word_count(),
                                   config.max_punct_ratio)) {
      out.rejected.push_back({s.id(), RejectReason::kPunctRatio, punctuation_ratio(s)});
    } else {
      out.kept.push_back(s);
    }
  }
  std::sort(out.rejected.begin(), out.rejected.end(),
            [](const auto& a, const auto& b) { return a.sample_id < b.sample_id; });
  const auto duplicates = out.stats.duplicate_count;
  out.stats = corpus_stats(out.kept);
  out.stats.duplicate_count = duplicates;
  return out;
}

}  // namespace lmcurate
