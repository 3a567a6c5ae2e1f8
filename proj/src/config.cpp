#include "sticky/config.h"

#include <openssl/evp.h>

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

#include "sticky/error.h"
#include "sticky/utf8.h"

namespace sticky {
namespace {

std::string fmt_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* first = value.data();
  const char* last = value.data() + value.size();
  if (!value.empty() && value.front() == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc{} || ptr != last || first == last) {
    throw ConfigError("invalid value for " + key + ": '" + value + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("invalid boolean for " + key + ": '" + value + "'");
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(value);
  while (std::getline(in, item, ',')) {
    item = utf8::trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<TokenId> parse_ids(const std::string& key, const std::string& value) {
  std::vector<TokenId> out;
  for (const auto& s : split_list(value)) out.push_back(parse_number<TokenId>(key, s));
  return out;
}

template <typename T>
std::string join(const std::vector<T>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    if constexpr (std::is_same_v<T, std::string>) {
      out += xs[i];
    } else {
      out += std::to_string(xs[i]);
    }
  }
  return out;
}

struct Field {
  const char* key;
  std::function<void(PipelineConfig&, const std::string&)> set;
  std::function<std::string(const PipelineConfig&)> get;
  bool affects_results = true;
};

#define STR_FIELD(k, m) \
  Field { k, [](PipelineConfig& c, const std::string& v) { c.m = v; }, [](const PipelineConfig& c) { return c.m; } }
#define SIZE_FIELD(k, m)                                                                  \
  Field {                                                                                 \
    k, [](PipelineConfig& c, const std::string& v) { c.m = parse_number<std::size_t>(k, v); }, \
        [](const PipelineConfig& c) { return std::to_string(c.m); }                       \
  }
#define DOUBLE_FIELD(k, m)                                                            \
  Field {                                                                             \
    k, [](PipelineConfig& c, const std::string& v) { c.m = parse_number<double>(k, v); }, \
        [](const PipelineConfig& c) { return fmt_double(c.m); }                       \
  }
#define BOOL_FIELD(k, m)                                                       \
  Field {                                                                      \
    k, [](PipelineConfig& c, const std::string& v) { c.m = parse_bool(k, v); }, \
        [](const PipelineConfig& c) { return std::string(c.m ? "true" : "false"); } \
  }
#define IDS_FIELD(k, m)                                                       \
  Field {                                                                     \
    k, [](PipelineConfig& c, const std::string& v) { c.m = parse_ids(k, v); }, \
        [](const PipelineConfig& c) { return join(c.m); }                     \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f{
        STR_FIELD("tokenizer", tokenizer),
        STR_FIELD("provider", provider),
        Field{"pairs", [](PipelineConfig& c, const std::string& v) { c.pairs = split_list(v); },
              [](const PipelineConfig& c) { return join(c.pairs); }},
        STR_FIELD("pairs_format", pairs_format),
        SIZE_FIELD("n", n),
        SIZE_FIELD("k", k),
        DOUBLE_FIELD("alpha", alpha),
        DOUBLE_FIELD("beta", beta),
        DOUBLE_FIELD("gamma", gamma),
        DOUBLE_FIELD("iqr_alpha", iqr_alpha),
        DOUBLE_FIELD("shortlist_fraction", shortlist_fraction),
        Field{"seed", [](PipelineConfig& c, const std::string& v) { c.seed = parse_number<std::uint64_t>("seed", v); },
              [](const PipelineConfig& c) { return std::to_string(c.seed); }},
        Field{"epsilon",
              [](PipelineConfig& c, const std::string& v) {
                if (v.empty()) {
                  c.epsilon.reset();
                } else {
                  c.epsilon = parse_number<double>("epsilon", v);
                }
              },
              [](const PipelineConfig& c) { return c.epsilon ? fmt_double(*c.epsilon) : std::string(); }},
        Field{"g_reduction", [](PipelineConfig& c, const std::string& v) { c.g_reduction = g_reduction_from_string(v); },
              [](const PipelineConfig& c) { return std::string(to_string(c.g_reduction)); }},
        SIZE_FIELD("pair_cap", pair_cap),
        SIZE_FIELD("validation.pair_cap", validation_pair_cap),
        SIZE_FIELD("max_words", max_words),
        SIZE_FIELD("batch_size", batch_size),
        Field{"retry.attempts",
              [](PipelineConfig& c, const std::string& v) { c.retry.attempts = parse_number<int>("retry.attempts", v); },
              [](const PipelineConfig& c) { return std::to_string(c.retry.attempts); }, false},
        Field{"retry.backoff_ms",
              [](PipelineConfig& c, const std::string& v) {
                c.retry.initial_backoff = std::chrono::milliseconds(parse_number<long>("retry.backoff_ms", v));
              },
              [](const PipelineConfig& c) { return std::to_string(c.retry.initial_backoff.count()); }, false},
        Field{"threads",
              [](PipelineConfig& c, const std::string& v) { c.threads = parse_number<unsigned>("threads", v); },
              [](const PipelineConfig& c) { return std::to_string(c.threads); }, false},
        DOUBLE_FIELD("stats.exact_budget", stats_exact_budget),
        SIZE_FIELD("stats.sample_pairs", stats_sample_pairs),
        BOOL_FIELD("stats.force_sampled", stats_force_sampled),
        SIZE_FIELD("synthetic.dim", synthetic_dim),
        DOUBLE_FIELD("synthetic.global_weight", synthetic_global_weight),
        IDS_FIELD("synthetic.sticky_ids", synthetic_sticky_ids),
        DOUBLE_FIELD("synthetic.sticky_weight", synthetic_sticky_weight),
        IDS_FIELD("synthetic.null_ids", synthetic_null_ids),
        STR_FIELD("corpus.docs", corpus_docs),
        STR_FIELD("corpus.queries", corpus_queries),
        STR_FIELD("corpus.qrels", corpus_qrels),
        Field{"impact.side", [](PipelineConfig& c, const std::string& v) { c.impact_side = insertion_side_from_string(v); },
              [](const PipelineConfig& c) { return std::string(to_string(c.impact_side)); }},
        BOOL_FIELD("impact.perturb_queries", impact_perturb_queries),
        IDS_FIELD("impact.sticky_ids", impact_sticky_ids),
        SIZE_FIELD("impact.normal_count", impact_normal_count),
        SIZE_FIELD("sweep.n_max", sweep_n_max),
        IDS_FIELD("sweep.tokens", sweep_tokens),
        SIZE_FIELD("sweep.pairs", sweep_pairs),
    };
    f.push_back(Field{"out", [](PipelineConfig& c, const std::string& v) { c.out = v; },
                      [](const PipelineConfig& c) { return c.out; }, false});
    return f;
  }();
  return table;
}

#undef STR_FIELD
#undef SIZE_FIELD
#undef DOUBLE_FIELD
#undef BOOL_FIELD
#undef IDS_FIELD

const Field* find_field(const std::string& key) {
  for (const auto& f : fields()) {
    if (key == f.key) return &f;
  }
  return nullptr;
}

}  // namespace

ConfigMap parse_config_text(const std::string& text, const std::string& origin) {
  ConfigMap m;
  std::istringstream in(text);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    const std::string t = utf8::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(n) + ": expected key=value");
    }
    const std::string key = utf8::trim(t.substr(0, eq));
    if (key.empty()) throw ConfigError(origin + ":" + std::to_string(n) + ": empty key");
    m[key] = utf8::trim(t.substr(eq + 1));
  }
  return m;
}

ConfigMap read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

std::string env_name_for(const std::string& key) {
  std::string out = "STICKY_";
  for (char c : key) {
    out += c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  }
  return out;
}

std::vector<std::string> known_config_keys() {
  std::vector<std::string> keys;
  for (const auto& f : fields()) keys.emplace_back(f.key);
  return keys;
}

PipelineConfig PipelineConfig::from_map(const ConfigMap& m) {
  PipelineConfig c;
  for (const auto& [key, value] : m) {
    const Field* f = find_field(key);
    if (!f) throw ConfigError("unknown config key '" + key + "'");
    f->set(c, value);
  }
  c.check();
  return c;
}

ConfigMap PipelineConfig::to_map() const {
  ConfigMap m;
  for (const auto& f : fields()) m[f.key] = f.get(*this);
  return m;
}

void PipelineConfig::check() const {
  if (n < 1) throw ConfigError("n must be at least 1");
  if (k < 1) throw ConfigError("k must be at least 1");
  if (!(gamma > 0.0)) throw ConfigError("gamma must be positive");
  if (!(shortlist_fraction > 0.0 && shortlist_fraction <= 1.0)) {
    throw ConfigError("shortlist_fraction must be in (0, 1]");
  }
  if (!(iqr_alpha >= 0.0)) throw ConfigError("iqr_alpha must be non-negative");
  if (epsilon && !(*epsilon >= 0.0)) throw ConfigError("epsilon must be non-negative");
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (retry.attempts < 1) throw ConfigError("retry.attempts must be at least 1");
  if (synthetic_dim < 2) throw ConfigError("synthetic.dim must be at least 2");
  if (!(synthetic_global_weight >= 0.0 && synthetic_global_weight < 1.0)) {
    throw ConfigError("synthetic.global_weight must be in [0, 1)");
  }
  if (pairs_format != "auto" && pairs_format != "jsonl" && pairs_format != "tsv") {
    throw ConfigError("pairs_format must be auto, jsonl or tsv");
  }
  if (tokenizer.empty()) throw ConfigError("tokenizer is required");
  if (provider.empty()) throw ConfigError("provider is required");
}

std::string PipelineConfig::canonical() const {
  std::map<std::string, std::string> sorted;
  for (const auto& f : fields()) {
    if (f.affects_results) sorted[f.key] = f.get(*this);
  }
  std::string out;
  for (const auto& [k, v] : sorted) out += k + "=" + v + "\n";
  return out;
}

std::string PipelineConfig::digest() const { return sha256_hex(canonical()); }

StatsOptions PipelineConfig::stats_options() const {
  StatsOptions o;
  o.exact_budget = stats_exact_budget;
  o.sample_pairs = stats_sample_pairs;
  o.seed = seed;
  o.force_sampled = stats_force_sampled;
  return o;
}

ValidationParams PipelineConfig::validation_params() const {
  ValidationParams p;
  p.n = n;
  p.iqr_alpha = iqr_alpha;
  p.reduction = g_reduction;
  p.epsilon = epsilon;
  p.pair_cap = validation_pair_cap;
  p.master_seed = seed;
  return p;
}

SyntheticProviderConfig PipelineConfig::synthetic_config() const {
  SyntheticProviderConfig s;
  s.dim = synthetic_dim;
  s.global_direction_weight = synthetic_global_weight;
  s.sticky_ids = synthetic_sticky_ids;
  s.sticky_pool_weight = synthetic_sticky_weight;
  s.null_ids = synthetic_null_ids;
  s.master_seed = seed;
  return s;
}

PipelineConfig load_config(const std::optional<std::string>& path, const ConfigMap& overrides,
                           const std::map<std::string, std::string>* environment) {
  ConfigMap m;
  if (path) m = read_config_file(*path);
  for (const auto& key : known_config_keys()) {
    const std::string name = env_name_for(key);
    if (environment) {
      if (auto it = environment->find(name); it != environment->end()) m[key] = it->second;
    } else if (const char* v = std::getenv(name.c_str())) {
      m[key] = v;
    }
  }
  for (const auto& [k, v] : overrides) m[k] = v;
  return PipelineConfig::from_map(m);
}

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 0xF];
  }
  return out;
}

}  // namespace sticky
