#include "lmcurate/tokenizer.hpp"

#include <algorithm>
#include <queue>
#include <unordered_set>

namespace lmcurate {

namespace {

constexpr std::size_t kMinMergeFrequency = 2;

inline std::uint64_t pair_key(TokenId left, TokenId right) {
  return (static_cast<std::uint64_t>(left) << 32) | right;
}

inline TokenId key_left(std::uint64_t key) { return static_cast<TokenId>(key >> 32); }
inline TokenId key_right(std::uint64_t key) { return static_cast<TokenId>(key); }

// Replaces every non-overlapping (left, right) occurrence, scanning left to
// right. Returns false when the pair does not occur.
bool merge_in_place(std::vector<TokenId>& symbols, TokenId left, TokenId right,
                    TokenId merged) {
  bool changed = false;
  std::size_t out = 0;
  for (std::size_t i = 0; i < symbols.size();) {
    if (i + 1 < symbols.size() && symbols[i] == left && symbols[i + 1] == right) {
      symbols[out++] = merged;
      i += 2;
      changed = true;
    } else {
      symbols[out++] = symbols[i++];
    }
  }
  symbols.resize(out);
  return changed;
}

}  // namespace

void WordCounts::add_text(std::string_view text) {
  for (auto w : word_views(text)) add(w);
}

void WordCounts::add(std::string_view word, std::uint64_t count) {
  if (word.empty()) return;
  auto it = counts_.find(std::string(word));
  if (it == counts_.end()) {
    counts_.emplace(std::string(word), count);
  } else {
    it->second += count;
  }
}

std::vector<std::pair<std::string, std::uint64_t>> WordCounts::sorted() const {
  std::vector<std::pair<std::string, std::uint64_t>> out(counts_.begin(), counts_.end());
  std::sort(out.begin(), out.end());
  return out;
}

Tokenizer::Tokenizer(std::vector<std::string> specials, std::size_t requested)
    : specials_(std::move(specials)), requested_vocab_size_(requested) {
  std::unordered_set<std::string> distinct(specials_.begin(), specials_.end());
  if (distinct.size() != specials_.size()) throw ConfigError("duplicate special tokens");
  token_bytes_.reserve(specials_.size() + 256);
  for (const auto& s : specials_) token_bytes_.push_back(s);
  for (int b = 0; b < 256; ++b) token_bytes_.emplace_back(1, static_cast<char>(b));
}

TokenId Tokenizer::add_merge(TokenId left, TokenId right) {
  const auto id = static_cast<TokenId>(token_bytes_.size());
  rank_.emplace(pair_key(left, right), static_cast<std::uint32_t>(merges_.size()));
  merges_.push_back({left, right});
  token_bytes_.push_back(token_bytes_[left] + token_bytes_[right]);
  return id;
}

Tokenizer Tokenizer::train(const std::vector<Sample>& corpus, std::size_t vocab_size,
                           std::vector<std::string> specials) {
  WordCounts counts;
  for (const auto& s : corpus) counts.add_text(s.text());
  return train(counts, vocab_size, std::move(specials));
}

Tokenizer Tokenizer::train(const WordCounts& counts, std::size_t vocab_size,
                           std::vector<std::string> specials) {
  if (vocab_size < 256 + specials.size() + 1) {
    throw ConfigError("vocab_size " + std::to_string(vocab_size) + " is below the minimum " +
                      std::to_string(256 + specials.size() + 1));
  }
  if (counts.empty()) throw InputError("cannot train a tokenizer on an empty corpus");

  Tokenizer model(std::move(specials), vocab_size);

  const auto vocabulary = counts.sorted();
  std::vector<std::vector<TokenId>> words;
  std::vector<std::uint64_t> freq;
  words.reserve(vocabulary.size());
  freq.reserve(vocabulary.size());
  for (const auto& [word, count] : vocabulary) {
    std::vector<TokenId> symbols;
    symbols.reserve(word.size());
    for (unsigned char b : word) symbols.push_back(model.byte_id(b));
    words.push_back(std::move(symbols));
    freq.push_back(count);
  }

  std::unordered_map<std::uint64_t, std::uint64_t> pair_count;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> pair_words;
  for (std::uint32_t w = 0; w < words.size(); ++w) {
    const auto& sym = words[w];
    for (std::size_t i = 0; i + 1 < sym.size(); ++i) {
      const auto key = pair_key(sym[i], sym[i + 1]);
      pair_count[key] += freq[w];
      auto& list = pair_words[key];
      if (list.empty() || list.back() != w) list.push_back(w);
    }
  }

  struct Candidate {
    std::uint64_t count;
    std::uint64_t key;
  };
  // Highest count first; equal counts prefer the lexicographically smallest
  // (left bytes, right bytes).
  const auto& bytes = model.token_bytes_;
  auto worse = [&bytes](const Candidate& a, const Candidate& b) {
    if (a.count != b.count) return a.count < b.count;
    const auto& al = bytes[key_left(a.key)];
    const auto& bl = bytes[key_left(b.key)];
    if (al != bl) return al > bl;
    const auto& ar = bytes[key_right(a.key)];
    const auto& br = bytes[key_right(b.key)];
    if (ar != br) return ar > br;
    return a.key > b.key;
  };
  std::priority_queue<Candidate, std::vector<Candidate>, decltype(worse)> heap(worse);
  for (const auto& [key, count] : pair_count) {
    if (count >= kMinMergeFrequency) heap.push({count, key});
  }

  std::vector<std::uint32_t> visited(words.size(), 0);
  std::uint32_t stamp = 0;
  std::vector<std::uint64_t> grown;

  while (model.vocab_size() < vocab_size && !heap.empty()) {
    const Candidate top = heap.top();
    heap.pop();
    auto cit = pair_count.find(top.key);
    const std::uint64_t current = cit == pair_count.end() ? 0 : cit->second;
    if (current != top.count) {
      // Counts only shrink between pushes, so a stale entry is re-queued at
      // its true value and compared again.
      if (current >= kMinMergeFrequency) heap.push({current, top.key});
      continue;
    }

    const TokenId left = key_left(top.key);
    const TokenId right = key_right(top.key);
    const TokenId merged = model.add_merge(left, right);

    ++stamp;
    grown.clear();
    auto affected = std::move(pair_words[top.key]);
    pair_words.erase(top.key);
    for (const std::uint32_t w : affected) {
      if (visited[w] == stamp) continue;
      visited[w] = stamp;
      auto& sym = words[w];
      std::vector<TokenId> before = sym;
      if (!merge_in_place(sym, left, right, merged)) continue;
      const std::uint64_t f = freq[w];
      for (std::size_t i = 0; i + 1 < before.size(); ++i) {
        auto it = pair_count.find(pair_key(before[i], before[i + 1]));
        it->second -= f;
        if (it->second == 0) pair_count.erase(it);
      }
      for (std::size_t i = 0; i + 1 < sym.size(); ++i) {
        const auto key = pair_key(sym[i], sym[i + 1]);
        pair_count[key] += f;
        if (sym[i] == merged || sym[i + 1] == merged) {
          auto& list = pair_words[key];
          if (list.empty() || list.back() != w) list.push_back(w);
          grown.push_back(key);
        }
      }
    }
    std::sort(grown.begin(), grown.end());
    grown.erase(std::unique(grown.begin(), grown.end()), grown.end());
    for (const auto key : grown) {
      auto it = pair_count.find(key);
      if (it != pair_count.end() && it->second >= kMinMergeFrequency) {
        heap.push({it->second, key});
      }
    }
  }
  return model;
}

Tokenizer Tokenizer::from_merges(
    const std::vector<std::pair<std::string, std::string>>& merges,
    std::vector<std::string> specials, std::size_t requested_vocab_size) {
  Tokenizer model(std::move(specials), 0);
  // Every id that carries a given byte string, in creation order. Merge sides
  // may carry a "\#n" suffix selecting the n-th of several such tokens.
  std::unordered_map<std::string, std::vector<TokenId>> by_bytes;
  for (int b = 0; b < 256; ++b) {
    by_bytes[std::string(1, static_cast<char>(b))].push_back(
        model.byte_id(static_cast<unsigned char>(b)));
  }
  auto resolve = [&](const std::string& side, std::size_t rank) {
    std::string bytes = side;
    std::size_t index = 0;
    for (std::size_t i = 0; i + 1 < side.size(); ++i) {
      if (side[i] != '\\') continue;
      if (side[i + 1] == '#') {
        bytes = side.substr(0, i);
        index = std::stoul(side.substr(i + 2));
        break;
      }
      ++i;  // skip the escaped character
    }
    bytes = unescape_bytes(bytes);
    const auto it = by_bytes.find(bytes);
    if (it == by_bytes.end() || index >= it->second.size()) {
      throw InputError("merge " + std::to_string(rank) + " references an unknown symbol");
    }
    return it->second[index];
  };
  for (std::size_t r = 0; r < merges.size(); ++r) {
    const TokenId l = resolve(merges[r].first, r);
    const TokenId rt = resolve(merges[r].second, r);
    const TokenId id = model.add_merge(l, rt);
    by_bytes[model.token_bytes_[id]].push_back(id);
  }
  model.requested_vocab_size_ =
      requested_vocab_size == 0 ? model.vocab_size() : requested_vocab_size;
  return model;
}

std::vector<TokenId> Tokenizer::encode_word(std::string_view word) const {
  std::vector<TokenId> sym;
  sym.reserve(word.size());
  for (unsigned char b : word) sym.push_back(byte_id(b));
  while (sym.size() > 1) {
    std::uint32_t best_rank = UINT32_MAX;
    for (std::size_t i = 0; i + 1 < sym.size(); ++i) {
      auto it = rank_.find(pair_key(sym[i], sym[i + 1]));
      if (it != rank_.end()) best_rank = std::min(best_rank, it->second);
    }
    if (best_rank == UINT32_MAX) break;
    const auto& m = merges_[best_rank];
    merge_in_place(sym, m.left, m.right,
                   static_cast<TokenId>(specials_.size() + 256 + best_rank));
  }
  return sym;
}

std::vector<TokenId> Tokenizer::encode(std::string_view text) const {
  std::vector<TokenId> ids;
  bool first = true;
  for (auto w : word_views(text)) {
    if (!first) ids.push_back(separator_id());
    first = false;
    auto piece = encode_word(w);
    ids.insert(ids.end(), piece.begin(), piece.end());
  }
  return ids;
}

std::string Tokenizer::decode(std::span<const TokenId> ids) const {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const TokenId id = ids[i];
    if (id >= vocab_size()) {
      throw InputError("token id " + std::to_string(id) + " at position " +
                       std::to_string(i) + " is out of range");
    }
    if (!is_special(id)) out += token_bytes_[id];
  }
  return out;
}

TokenId Tokenizer::special_id(std::string_view name) const {
  for (std::size_t i = 0; i < specials_.size(); ++i) {
    if (specials_[i] == name) return static_cast<TokenId>(i);
  }
  throw ConfigError("tokenizer has no special token " + std::string(name));
}

std::vector<std::pair<std::string, std::string>> Tokenizer::merge_bytes() const {
  std::vector<std::pair<std::string, std::string>> out;
  out.reserve(merges_.size());
  for (const auto& m : merges_) out.emplace_back(token_bytes_[m.left], token_bytes_[m.right]);
  return out;
}

std::vector<std::pair<std::string, std::string>> Tokenizer::merge_strings() const {
  // Escaped form, with "\#n" appended to the n-th (n > 0) token sharing the
  // same bytes so that loading resolves every side to the same id.
  std::unordered_map<std::string_view, std::size_t> seen;
  std::vector<std::string> rendered(token_bytes_.size());
  for (std::size_t id = specials_.size(); id < token_bytes_.size(); ++id) {
    const std::size_t n = seen[token_bytes_[id]]++;
    rendered[id] = escape_bytes(token_bytes_[id]);
    if (n > 0) rendered[id] += "\\#" + std::to_string(n);
  }
  std::vector<std::pair<std::string, std::string>> out;
  out.reserve(merges_.size());
  for (const auto& m : merges_) out.emplace_back(rendered[m.left], rendered[m.right]);
  return out;
}

std::string escape_bytes(std::string_view bytes) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned char c : bytes) {
    if (c == '\\') {
      out += "\\\\";
    } else if (c >= 0x21 && c <= 0x7e) {
      out += static_cast<char>(c);
    } else {
      out += "\\x";
      out += kHex[c >> 4];
      out += kHex[c & 0xF];
    }
  }
  return out;
}

std::string unescape_bytes(std::string_view text) {
  auto hex = [&](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw InputError("bad escape in '" + std::string(text) + "'");
  };
  std::string out;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '\\') {
      out += text[i];
      continue;
    }
    if (i + 1 < text.size() && text[i + 1] == '\\') {
      out += '\\';
      ++i;
    } else if (i + 3 < text.size() && text[i + 1] == 'x') {
      out += static_cast<char>(hex(text[i + 2]) * 16 + hex(text[i + 3]));
      i += 3;
    } else {
      throw InputError("bad escape in '" + std::string(text) + "'");
    }
  }
  return out;
}

nlohmann::json Tokenizer::to_json() const {
  nlohmann::json merges = nlohmann::json::array();
  for (auto& [l, r] : merge_strings()) merges.push_back({std::move(l), std::move(r)});
  return {{"type", "byte_bpe"},
          {"vocab_size", vocab_size()},
          {"requested_vocab_size", requested_vocab_size_},
          {"specials", specials_},
          {"merges", std::move(merges)}};
}

Tokenizer Tokenizer::from_json(const nlohmann::json& j) {
  std::vector<std::pair<std::string, std::string>> merges;
  for (const auto& m : j.at("merges")) {
    merges.emplace_back(m.at(0).get<std::string>(), m.at(1).get<std::string>());
  }
  auto model = from_merges(merges, j.at("specials").get<std::vector<std::string>>(),
                           j.value("requested_vocab_size", std::size_t{0}));
  if (j.contains("vocab_size") && j["vocab_size"].get<std::size_t>() != model.vocab_size()) {
    throw InputError("tokenizer vocab_size does not match its merges");
  }
  return model;
}

TokenizerMetrics tokenizer_metrics(const Tokenizer& model,
                                   const std::vector<Sample>& corpus) {
  TokenizerMetrics m;
  std::unordered_map<std::string_view, std::size_t> cache;
  std::vector<char> used(model.vocab_size(), 0);
  std::uint64_t distinct = 0;
  for (const auto& s : corpus) {
    for (auto w : word_views(s.text())) {
      ++m.words;
      m.bytes += w.size();
      auto it = cache.find(w);
      if (it == cache.end()) {
        const auto ids = model.encode_word(w);
        for (auto id : ids) {
          if (!used[id]) {
            used[id] = 1;
            ++distinct;
          }
        }
        it = cache.emplace(w, ids.size()).first;
      }
      m.tokens += it->second;
    }
  }
  if (m.words > 0) m.fertility = static_cast<double>(m.tokens) / static_cast<double>(m.words);
  if (m.tokens > 0) m.compression = static_cast<double>(m.bytes) / static_cast<double>(m.tokens);
  m.vocab_utilization = static_cast<double>(distinct) / static_cast<double>(model.vocab_size());
  return m;
}

}  // namespace lmcurate
