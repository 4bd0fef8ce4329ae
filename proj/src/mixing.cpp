#include "lmcurate/mixing.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_set>

#include "lmcurate/rng.hpp"

namespace lmcurate {

namespace {

std::uint64_t total_words(const std::vector<Sample>& samples) {
  std::uint64_t n = 0;
  for (const auto& s : samples) n += s.word_count();
  return n;
}

std::uint64_t max_words(const std::vector<Sample>& samples) {
  std::uint64_t m = 0;
  for (const auto& s : samples) m = std::max<std::uint64_t>(m, s.word_count());
  return m;
}

// Draws indices of `pool` without replacement (incremental Fisher-Yates) until
// the drawn word count reaches `target`.
std::vector<std::size_t> draw_until(const std::vector<Sample>& pool,
                                    std::uint64_t target, SplitMix64& rng,
                                    std::uint64_t& drawn_words) {
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<std::size_t> picked;
  drawn_words = 0;
  for (std::size_t i = 0; i < order.size() && drawn_words < target; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(order.size() - i));
    std::swap(order[i], order[j]);
    picked.push_back(order[i]);
    drawn_words += pool[order[i]].word_count();
  }
  return picked;
}

}  // namespace

MixResult mix(const std::vector<Sample>& base,
              const std::vector<Sample>& replacement, const MixSpec& spec) {
  const std::uint64_t target = spec.target_replacement_words;
  const std::uint64_t base_words = total_words(base);
  const std::uint64_t pool_words = total_words(replacement);
  if (target > base_words) {
    throw ConfigError("target_replacement_words (" + std::to_string(target) +
                      ") exceeds base corpus words (" + std::to_string(base_words) + ")");
  }
  if (target > pool_words) {
    throw ConfigError("replacement pool has " + std::to_string(pool_words) +
                      " words, fewer than the target " + std::to_string(target));
  }

  MixResult out;
  out.report.seed = spec.seed;
  out.report.tolerance_words = spec.tolerance_words.value_or(
      std::max(max_words(base), max_words(replacement)));

  SplitMix64 rng(spec.seed);
  const auto removed = draw_until(base, target, rng, out.report.removed_words);
  const auto added = draw_until(replacement, target, rng, out.report.added_words);

  std::vector<char> drop(base.size(), 0);
  for (auto i : removed) {
    drop[i] = 1;
    out.report.removed_ids.push_back(base[i].id());
  }
  std::sort(out.report.removed_ids.begin(), out.report.removed_ids.end());

  out.mixed.reserve(base.size() - removed.size() + added.size());
  for (std::size_t i = 0; i < base.size(); ++i) {
    if (!drop[i]) out.mixed.push_back(base[i]);
  }
  for (auto i : added) {
    out.mixed.push_back(replacement[i]);
    out.report.added_ids.push_back(replacement[i].id());
  }
  return out;
}

CorpusStats corpus_stats(const std::vector<Sample>& samples) {
  CorpusStats stats;
  stats.sample_count = samples.size();
  for (const auto& s : samples) {
    stats.total_words += s.word_count();
    stats.words_by_source[s.source()] += s.word_count();
  }
  return stats;
}

}  // namespace lmcurate
