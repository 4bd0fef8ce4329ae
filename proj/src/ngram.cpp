#include "lmcurate/ngram.hpp"

#include <algorithm>
#include <cmath>

namespace lmcurate {

std::size_t NgramKeyHash::operator()(const NgramKey& k) const noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL ^ k.len;
  for (std::size_t i = 0; i < k.len; ++i) {
    h ^= k.ids[i];
    h *= 0x100000001B3ULL;
    h ^= h >> 29;
  }
  return static_cast<std::size_t>(h);
}

namespace {

NgramKey make_key(std::span<const TokenId> ids) {
  NgramKey k;
  k.len = static_cast<std::uint8_t>(ids.size());
  std::copy(ids.begin(), ids.end(), k.ids.begin());
  return k;
}

std::vector<TokenId> pad(std::span<const TokenId> ids, std::size_t order, TokenId bos,
                         TokenId eos) {
  std::vector<TokenId> out(order - 1, bos);
  out.insert(out.end(), ids.begin(), ids.end());
  out.push_back(eos);
  return out;
}

}  // namespace

NgramModel NgramModel::uniform(std::size_t vocab_size) {
  if (vocab_size == 0) throw ConfigError("vocab size must be positive");
  NgramModel m;
  m.vocab_size_ = vocab_size;
  return m;
}

NgramModel NgramModel::train(const std::vector<std::vector<TokenId>>& sequences,
                             std::size_t vocab_size, TokenId bos, TokenId eos,
                             std::size_t order, double discount) {
  if (order < 1 || order > kMaxNgramOrder) {
    throw ConfigError("n-gram order must lie in [1, " + std::to_string(kMaxNgramOrder) + "]");
  }
  if (!(discount > 0.0 && discount < 1.0)) {
    throw ConfigError("discount must lie strictly between 0 and 1");
  }
  if (sequences.empty()) throw InputError("cannot train an n-gram model on an empty stream");

  NgramModel m = uniform(vocab_size);
  m.order_ = order;
  m.discount_ = discount;
  m.bos_ = bos;
  m.eos_ = eos;
  m.trained_ = true;

  for (const auto& seq : sequences) {
    const auto padded = pad(seq, order, bos, eos);
    const std::span<const TokenId> all(padded);
    for (std::size_t i = order - 1; i < padded.size(); ++i) {
      for (std::size_t k = 1; k <= order; ++k) {
        const auto gram = all.subspan(i + 1 - k, k);
        auto& c = m.counts_[make_key(gram)];
        auto& ctx = m.contexts_[make_key(gram.first(k - 1))];
        ++ctx.total;
        if (c++ == 0) ++ctx.distinct;
      }
    }
  }
  return m;
}

long double NgramModel::prob_extended(std::span<const TokenId> context, TokenId next) const {
  long double p = 1.0L / static_cast<long double>(vocab_size_);
  if (!trained_) return p;
  std::array<TokenId, kMaxNgramOrder> buf{};
  for (std::size_t k = 1; k <= order_; ++k) {
    const std::size_t ctx_len = k - 1;
    if (ctx_len > context.size()) break;
    const auto ctx = context.last(ctx_len);
    const auto cit = contexts_.find(make_key(ctx));
    if (cit == contexts_.end()) continue;
    std::copy(ctx.begin(), ctx.end(), buf.begin());
    buf[ctx_len] = next;
    const auto git = counts_.find(make_key(std::span<const TokenId>(buf.data(), k)));
    const long double c = git == counts_.end() ? 0.0L : static_cast<long double>(git->second);
    const long double total = static_cast<long double>(cit->second.total);
    const long double d = discount_;
    const long double backoff = d * static_cast<long double>(cit->second.distinct) / total;
    p = std::max(c - d, 0.0L) / total + backoff * p;
  }
  return p;
}

double NgramModel::prob(std::span<const TokenId> context, TokenId next) const {
  return static_cast<double>(prob_extended(context, next));
}

NgramModel::SequenceScore NgramModel::score(std::span<const TokenId> ids) const {
  SequenceScore s;
  const auto padded = pad(ids, order_, bos_, eos_);
  const std::span<const TokenId> all(padded);
  // Neumaier summation in extended precision, so that e.g. a uniform model's
  // perplexity comes back as exactly V.
  long double sum = 0;
  long double carry = 0;
  for (std::size_t i = order_ - 1; i < padded.size(); ++i) {
    const long double x = std::log(prob_extended(all.first(i), padded[i]));
    const long double t = sum + x;
    carry += std::fabs(sum) >= std::fabs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
    ++s.tokens;
  }
  s.extended_log_prob = sum + carry;
  s.total_log_prob = static_cast<double>(s.extended_log_prob);
  return s;
}

LogProb log_prob(const NgramModel& model, std::string_view text, const Tokenizer& tokenizer) {
  const auto s = model.score(tokenizer.encode(text));
  return {s.total_log_prob, s.mean_log_prob(), s.tokens};
}

double perplexity(const NgramModel& model, const std::vector<std::string>& texts,
                  const Tokenizer& tokenizer) {
  if (texts.empty()) throw InputError("perplexity needs at least one sample");
  long double total = 0;
  long double carry = 0;
  std::size_t tokens = 0;
  for (const auto& t : texts) {
    const auto s = model.score(tokenizer.encode(t));
    const long double x = s.extended_log_prob;
    const long double sum = total + x;
    carry += std::fabs(total) >= std::fabs(x) ? (total - sum) + x : (x - sum) + total;
    total = sum;
    tokens += s.tokens;
  }
  return static_cast<double>(std::exp(-(total + carry) / static_cast<long double>(tokens)));
}

PairAccuracy minimal_pair_accuracy(const NgramModel& model,
                                   const std::vector<MinimalPair>& pairs,
                                   const Tokenizer& tokenizer) {
  if (pairs.empty()) throw InputError("minimal-pair evaluation needs at least one pair");
  PairAccuracy out;
  std::map<std::string, std::pair<double, std::size_t>> per;
  double credit = 0;
  for (const auto& p : pairs) {
    if (p.good == p.bad) throw InputError("minimal pair with identical sentences");
    const double good = log_prob(model, p.good, tokenizer).total;
    const double bad = log_prob(model, p.bad, tokenizer).total;
    const double c = good > bad ? 1.0 : (good == bad ? 0.5 : 0.0);
    credit += c;
    auto& slot = per[p.phenomenon];
    slot.first += c;
    ++slot.second;
  }
  out.pairs = pairs.size();
  out.accuracy = credit / static_cast<double>(pairs.size());
  for (const auto& [name, v] : per) out.by_phenomenon[name] = v.first / v.second;
  return out;
}

}  // namespace lmcurate
