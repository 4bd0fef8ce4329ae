#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "lmcurate/corpus.hpp"

namespace lmcurate {

/// Non-negative rational used for threshold comparisons that must not depend
/// on floating-point rounding at the boundary.
struct Ratio {
  std::uint64_t num = 0;
  std::uint64_t den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }

  // Exact conversion from a decimal literal such as "0.33".
  static Ratio parse_decimal(std::string_view text);
  // Uses the shortest round-trip decimal form of `v`.
  static Ratio from_double(double v);
  std::string to_decimal() const;

  bool operator==(const Ratio&) const = default;
};

struct FilterConfig {
  Ratio max_punct_ratio{33, 100};
  std::size_t min_chars = 10;
  bool dedup_enabled = true;
  // Duplicate key trims leading/trailing whitespace when set.
  bool dedup_trim = true;

  void validate() const;
};

enum class RejectReason { kDuplicate, kPunctRatio, kTooShort };

std::string_view to_string(RejectReason reason);

struct RejectionRecord {
  SampleId sample_id = 0;
  RejectReason reason = RejectReason::kDuplicate;
  // Duplicate: id of the kept first occurrence. Too short: char count.
  // Punct ratio: the ratio, +inf when the sample has punctuation but no words.
  double value = 0.0;

  bool operator==(const RejectionRecord&) const = default;
};

struct DedupResult {
  std::vector<Sample> kept;
  std::vector<RejectionRecord> rejected;
};

DedupResult dedup(const std::vector<Sample>& samples, bool trim = true);

// punct / words; +inf when words == 0 and punct > 0; 0 when both are 0.
double punctuation_ratio(const Sample& sample);

// Exact test of punct/words > limit.
bool exceeds_punct_ratio(std::size_t punct, std::size_t words, const Ratio& limit);

struct FilterResult {
  std::vector<Sample> kept;
  std::vector<RejectionRecord> rejected;
  CorpusStats stats;
};

/// dedup -> too_short -> punct_ratio; each rejected sample carries the reason
/// of the first filter that fired.
FilterResult apply_filters(const std::vector<Sample>& samples,
                           const FilterConfig& config);

}  // namespace lmcurate
