#include "lmcurate/config.hpp"

#include <fstream>
#include <algorithm>

#include "lmcurate/rng.hpp"

namespace lmcurate {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, std::string_view where,
                    std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) throw ConfigError(std::string(where) + " must be an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || a == key;
    if (!ok) throw ConfigError("unknown key '" + key + "' in " + std::string(where));
  }
}

const json& section(const json& j, const char* name) {
  static const json kEmpty = json::object();
  auto it = j.find(name);
  return it == j.end() ? kEmpty : *it;
}

}  // namespace

json to_json(const FilterConfig& c) {
  return {{"max_punct_ratio", c.max_punct_ratio.value()},
          {"min_chars", c.min_chars},
          {"dedup", c.dedup_enabled},
          {"dedup_trim", c.dedup_trim}};
}

FilterConfig filter_config_from_json(const json& j) {
  FilterConfig c;
  if (auto it = j.find("max_punct_ratio"); it != j.end()) {
    c.max_punct_ratio = it->is_string() ? Ratio::parse_decimal(it->get<std::string>())
                                        : Ratio::from_double(it->get<double>());
  }
  if (auto it = j.find("min_chars"); it != j.end()) {
    if (!it->is_number_integer() || it->get<std::int64_t>() < 0) throw ConfigError("min_chars must be a non-negative integer");
    c.min_chars = it->get<std::size_t>();
  }
  c.dedup_enabled = j.value("dedup", c.dedup_enabled);
  c.dedup_trim = j.value("dedup_trim", c.dedup_trim);
  c.validate();
  return c;
}

json to_json(const ScoringConfig& c) {
  json weights = json::object();
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    weights[std::string(kFeatureNames[i])] = c.weights[i];
  }
  return {{"weights", weights}, {"normalize", c.normalize}};
}

ScoringConfig scoring_config_from_json(const json& j) {
  ScoringConfig c;
  if (auto it = j.find("weights"); it != j.end()) {
    if (!it->is_object()) throw ConfigError("scoring.weights must be an object");
    std::array<double, kFeatureCount> w{};
    for (const auto& [name, value] : it->items()) {
      w[static_cast<std::size_t>(parse_feature(name))] = value.get<double>();
    }
    c.weights = w;
  }
  c.normalize = j.value("normalize", c.normalize);
  c.validate();
  return c;
}

void RunConfig::validate() const {
  filter.validate();
  scoring.validate();
  if (vocab_size < 256 + specials.size() + 1) {
    throw ConfigError("tokenizer.vocab_size must be at least " +
                      std::to_string(256 + specials.size() + 1));
  }
  for (const char* name : {"<bos>", "<eos>"}) {
    if (eval.enabled && std::find(specials.begin(), specials.end(), name) == specials.end()) {
      throw ConfigError(std::string("evaluation needs the special token ") + name);
    }
  }
  if (epochs < 1) throw ConfigError("curriculum.epochs must be >= 1");
  if (shard_size < 1) throw ConfigError("curriculum.shard_size must be >= 1");
  if (eval.order < 1 || eval.order > 5) throw ConfigError("eval.order must lie in [1,5]");
  if (!(eval.discount > 0 && eval.discount < 1)) {
    throw ConfigError("eval.discount must lie strictly between 0 and 1");
  }
  if (!(eval.heldout_fraction > 0 && eval.heldout_fraction < 1)) {
    throw ConfigError("eval.heldout_fraction must lie strictly between 0 and 1");
  }
  if (!(recipe.base_lr > 0)) throw ConfigError("recipe.base_lr must be positive");
}

MixSpec RunConfig::mix_spec() const {
  MixSpec spec;
  spec.target_replacement_words = target_replacement_words;
  spec.seed = substream_seed(seed, "mixing");
  spec.replacement_source = replacement_source;
  spec.tolerance_words = tolerance_words;
  return spec;
}

json to_json(const RunConfig& c) {
  json inputs = json::array();
  for (const auto& in : c.inputs) {
    inputs.push_back({{"path", in.path.string()},
                      {"format", to_string(in.format)},
                      {"source", in.source}});
  }
  json filter = to_json(c.filter);
  filter["filter_replacement"] = c.filter_replacement;
  TrainingRecipe recipe = c.recipe;
  recipe.vocab_size = c.vocab_size;
  return {
      {"inputs", inputs},
      {"filter", filter},
      {"scoring", to_json(c.scoring)},
      {"mix",
       {{"target_replacement_words", c.target_replacement_words},
        {"replacement_source", c.replacement_source},
        {"tolerance_words", c.tolerance_words ? json(*c.tolerance_words) : json(nullptr)}}},
      {"tokenizer", {{"vocab_size", c.vocab_size}, {"specials", c.specials}}},
      {"curriculum",
       {{"epochs", c.epochs}, {"pacing", to_string(c.pacing)}, {"shard_size", c.shard_size}}},
      {"recipe", to_json(recipe)},
      {"eval",
       {{"enabled", c.eval.enabled},
        {"order", c.eval.order},
        {"discount", c.eval.discount},
        {"max_train_samples", c.eval.max_train_samples},
        {"heldout_fraction", c.eval.heldout_fraction},
        {"pairs", c.eval.pairs ? json(c.eval.pairs->string()) : json(nullptr)}}},
      {"seed", c.seed},
      {"output_dir", c.output_dir.string()},
  };
}

RunConfig config_from_json(const json& j, const std::filesystem::path& base_dir) {
  try {
    reject_unknown(j, "config",
                   {"inputs", "filter", "scoring", "mix", "tokenizer", "curriculum", "recipe",
                    "eval", "seed", "output_dir"});
    RunConfig c;
    auto resolve = [&](const std::string& p) {
      std::filesystem::path path(p);
      return path.is_relative() && !base_dir.empty() ? (base_dir / path).lexically_normal() : path;
    };

    for (const auto& in : j.value("inputs", json::array())) {
      reject_unknown(in, "inputs[]", {"path", "format", "source"});
      InputSpec spec;
      spec.path = resolve(in.at("path").get<std::string>());
      spec.format = parse_input_format(in.value("format", std::string("jsonl")));
      spec.source = in.value("source", std::string(source::kBase));
      c.inputs.push_back(std::move(spec));
    }

    const json& filter = section(j, "filter");
    reject_unknown(filter, "filter",
                   {"max_punct_ratio", "min_chars", "dedup", "dedup_trim", "filter_replacement"});
    c.filter = filter_config_from_json(filter);
    c.filter_replacement = filter.value("filter_replacement", c.filter_replacement);

    const json& scoring = section(j, "scoring");
    reject_unknown(scoring, "scoring", {"weights", "normalize"});
    c.scoring = scoring_config_from_json(scoring);

    const json& mix = section(j, "mix");
    reject_unknown(mix, "mix", {"target_replacement_words", "replacement_source", "tolerance_words"});
    c.target_replacement_words = mix.value("target_replacement_words", c.target_replacement_words);
    c.replacement_source = mix.value("replacement_source", c.replacement_source);
    if (auto it = mix.find("tolerance_words"); it != mix.end() && !it->is_null()) {
      c.tolerance_words = it->get<std::uint64_t>();
    }

    const json& tok = section(j, "tokenizer");
    reject_unknown(tok, "tokenizer", {"vocab_size", "specials"});
    c.vocab_size = tok.value("vocab_size", c.vocab_size);
    c.specials = tok.value("specials", c.specials);

    const json& cur = section(j, "curriculum");
    reject_unknown(cur, "curriculum", {"epochs", "pacing", "shard_size"});
    c.epochs = cur.value("epochs", c.epochs);
    c.pacing = parse_pacing(cur.value("pacing", std::string(to_string(c.pacing))));
    c.shard_size = cur.value("shard_size", c.shard_size);

    const json& recipe = section(j, "recipe");
    reject_unknown(recipe, "recipe",
                   {"architecture", "model_size", "vocab_size", "batch_size", "base_lr",
                    "weight_decay", "lr_scheduler", "decoder_layers", "attention_heads"});
    c.recipe = recipe_from_json(recipe);
    if (recipe.contains("vocab_size") && c.recipe.vocab_size != c.vocab_size) {
      throw ConfigError("recipe.vocab_size disagrees with tokenizer.vocab_size");
    }
    c.recipe.vocab_size = c.vocab_size;

    const json& eval = section(j, "eval");
    reject_unknown(eval, "eval",
                   {"enabled", "order", "discount", "max_train_samples", "heldout_fraction",
                    "pairs"});
    c.eval.enabled = eval.value("enabled", c.eval.enabled);
    c.eval.order = eval.value("order", c.eval.order);
    c.eval.discount = eval.value("discount", c.eval.discount);
    c.eval.max_train_samples = eval.value("max_train_samples", c.eval.max_train_samples);
    c.eval.heldout_fraction = eval.value("heldout_fraction", c.eval.heldout_fraction);
    if (auto it = eval.find("pairs"); it != eval.end() && !it->is_null()) {
      c.eval.pairs = resolve(it->get<std::string>());
    }

    c.seed = j.value("seed", c.seed);
    if (auto it = j.find("output_dir"); it != j.end()) {
      c.output_dir = resolve(it->get<std::string>());
    }
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  // Relative paths inside a config file are relative to the file.
  return config_from_json(j, std::filesystem::absolute(path).parent_path());
}

}  // namespace lmcurate
