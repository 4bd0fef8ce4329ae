#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lmcurate/corpus.hpp"

namespace lmcurate {

using TokenId = std::uint32_t;

inline const std::vector<std::string> kDefaultSpecials = {"<pad>", "<unk>", "<bos>",
                                                          "<eos>"};

/// Frequency of every whitespace-delimited word in a corpus.
class WordCounts {
 public:
  void add_text(std::string_view text);
  void add(std::string_view word, std::uint64_t count = 1);

  // Sorted by word bytes so training never depends on hash order.
  std::vector<std::pair<std::string, std::uint64_t>> sorted() const;
  bool empty() const { return counts_.empty(); }

 private:
  std::unordered_map<std::string, std::uint64_t> counts_;
};

/// Byte-level BPE model. Id layout: specials first, then the 256 byte
/// symbols, then one id per merge in rank order.
class Tokenizer {
 public:
  struct Merge {
    TokenId left;
    TokenId right;
  };

  static Tokenizer train(const WordCounts& counts, std::size_t vocab_size,
                         std::vector<std::string> specials = kDefaultSpecials);
  static Tokenizer train(const std::vector<Sample>& corpus, std::size_t vocab_size,
                         std::vector<std::string> specials = kDefaultSpecials);

  // Rebuilds a model from merges in the escaped form of merge_strings().
  static Tokenizer from_merges(
      const std::vector<std::pair<std::string, std::string>>& merges,
      std::vector<std::string> specials, std::size_t requested_vocab_size = 0);

  /// Word tokens of each whitespace-delimited word, joined by the id of the
  /// space byte.
  std::vector<TokenId> encode(std::string_view text) const;
  std::vector<TokenId> encode_word(std::string_view word) const;

  /// Concatenated bytes of `ids`; special tokens decode to nothing. Throws
  /// InputError naming the position of an out-of-range id.
  std::string decode(std::span<const TokenId> ids) const;

  std::size_t vocab_size() const { return token_bytes_.size(); }
  std::size_t requested_vocab_size() const { return requested_vocab_size_; }
  // How many ids short of the requested size training stopped.
  std::size_t shortfall() const {
    return requested_vocab_size_ > vocab_size() ? requested_vocab_size_ - vocab_size() : 0;
  }

  const std::vector<std::string>& specials() const { return specials_; }
  const std::vector<Merge>& merges() const { return merges_; }
  // Raw bytes of each merge's sides, in rank order.
  std::vector<std::pair<std::string, std::string>> merge_bytes() const;
  // Escaped, id-unambiguous rendering used by the JSON model file.
  std::vector<std::pair<std::string, std::string>> merge_strings() const;

  const std::string& token_bytes(TokenId id) const { return token_bytes_.at(id); }
  bool is_special(TokenId id) const { return id < specials_.size(); }
  TokenId byte_id(unsigned char b) const { return static_cast<TokenId>(specials_.size() + b); }
  TokenId separator_id() const { return byte_id(' '); }
  // Throws ConfigError when `name` is not a special token of this model.
  TokenId special_id(std::string_view name) const;

  nlohmann::json to_json() const;
  static Tokenizer from_json(const nlohmann::json& j);

 private:
  Tokenizer(std::vector<std::string> specials, std::size_t requested);
  TokenId add_merge(TokenId left, TokenId right);

  std::vector<std::string> specials_;
  std::vector<std::string> token_bytes_;
  std::vector<Merge> merges_;
  std::unordered_map<std::uint64_t, std::uint32_t> rank_;
  std::size_t requested_vocab_size_ = 0;
};

struct TokenizerMetrics {
  double fertility = 0;          // word tokens per word
  double compression = 0;        // word bytes per word token
  double vocab_utilization = 0;  // distinct ids used / vocab size
  std::uint64_t words = 0;
  std::uint64_t tokens = 0;
  std::uint64_t bytes = 0;
};

TokenizerMetrics tokenizer_metrics(const Tokenizer& model,
                                   const std::vector<Sample>& corpus);

// Escapes bytes outside printable ASCII as \xHH (and '\' as "\\").
std::string escape_bytes(std::string_view bytes);
std::string unescape_bytes(std::string_view text);

}  // namespace lmcurate
