#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "lmcurate/tokenizer.hpp"

namespace lmcurate {

inline constexpr std::size_t kMaxNgramOrder = 5;

// Up to kMaxNgramOrder token ids; unused slots are zero and excluded by `len`.
struct NgramKey {
  std::array<TokenId, kMaxNgramOrder> ids{};
  std::uint8_t len = 0;

  bool operator==(const NgramKey&) const = default;
};

struct NgramKeyHash {
  std::size_t operator()(const NgramKey& k) const noexcept;
};

/// Interpolated absolute-discount n-gram model over tokenizer ids:
///
///   p_k(w | ctx) = max(c(ctx w) - d, 0) / c(ctx)
///                + d * N1+(ctx .) / c(ctx) * p_{k-1}(w | ctx')
///
/// where ctx' drops the oldest token, p_0 = 1/V, and an unseen context falls
/// straight through to the lower order.
class NgramModel {
 public:
  // Untrained model: every token has probability 1/V.
  static NgramModel uniform(std::size_t vocab_size);

  /// Counts every sequence with order-1 leading `bos` ids and one trailing
  /// `eos`. Throws InputError on an empty stream, ConfigError on bad order or
  /// discount.
  static NgramModel train(const std::vector<std::vector<TokenId>>& sequences,
                          std::size_t vocab_size, TokenId bos, TokenId eos,
                          std::size_t order = 3, double discount = 0.75);

  // `context` holds the preceding tokens, most recent last; only the last
  // order-1 are used.
  double prob(std::span<const TokenId> context, TokenId next) const;

  struct SequenceScore {
    double total_log_prob = 0;
    long double extended_log_prob = 0;  // same sum before rounding to double
    std::size_t tokens = 0;  // predicted positions, including eos
    double mean_log_prob() const { return tokens ? total_log_prob / tokens : 0.0; }
  };
  SequenceScore score(std::span<const TokenId> ids) const;

  std::size_t order() const { return order_; }
  double discount() const { return discount_; }
  std::size_t vocab_size() const { return vocab_size_; }
  TokenId bos() const { return bos_; }
  TokenId eos() const { return eos_; }
  bool trained() const { return trained_; }

 private:
  long double prob_extended(std::span<const TokenId> context, TokenId next) const;

  struct ContextStats {
    std::uint64_t total = 0;
    std::uint64_t distinct = 0;
  };

  std::size_t order_ = 1;
  double discount_ = 0.75;
  std::size_t vocab_size_ = 1;
  TokenId bos_ = 0;
  TokenId eos_ = 0;
  bool trained_ = false;
  std::unordered_map<NgramKey, std::uint64_t, NgramKeyHash> counts_;
  std::unordered_map<NgramKey, ContextStats, NgramKeyHash> contexts_;
};

struct LogProb {
  double total = 0;
  double per_token = 0;
  std::size_t tokens = 0;
};

LogProb log_prob(const NgramModel& model, std::string_view text, const Tokenizer& tokenizer);

// exp(-mean log-prob per predicted token) over all samples.
double perplexity(const NgramModel& model, const std::vector<std::string>& texts,
                  const Tokenizer& tokenizer);

struct MinimalPair {
  std::string good;
  std::string bad;
  std::string phenomenon;
};

struct PairAccuracy {
  double accuracy = 0;
  std::map<std::string, double> by_phenomenon;
  std::size_t pairs = 0;
};

/// Credit 1 when log p(good) > log p(bad), 0.5 on an exact tie.
PairAccuracy minimal_pair_accuracy(const NgramModel& model,
                                   const std::vector<MinimalPair>& pairs,
                                   const Tokenizer& tokenizer);

}  // namespace lmcurate
