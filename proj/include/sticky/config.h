#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sticky/geometry.h"
#include "sticky/http.h"
#include "sticky/impact.h"
#include "sticky/synthetic_provider.h"
#include "sticky/validation.h"

namespace sticky {

// Flat key=value settings. Lines starting with '#' are comments; keys are
// dotted names like "synthetic.dim".
using ConfigMap = std::map<std::string, std::string>;

ConfigMap parse_config_text(const std::string& text, const std::string& origin = "config");
ConfigMap read_config_file(const std::string& path);

// STICKY_<KEY> overrides <key>, with '.' written as '_' and letters upper-cased.
std::string env_name_for(const std::string& key);

struct PipelineConfig {
  std::string tokenizer = "toy";  // "toy", a tokenizer.json path, or an http(s) URL
  std::string provider = "synthetic";
  std::vector<std::string> pairs;  // empty with the toy tokenizer: toy pairs
  std::string pairs_format = "auto";

  std::size_t n = 8;
  std::size_t k = 5;
  double alpha = 1.0;
  double beta = 1.0;
  double gamma = 1e-8;
  double iqr_alpha = 1.5;
  double shortlist_fraction = 0.02;
  std::uint64_t seed = 0;
  std::optional<double> epsilon;
  GReduction g_reduction = GReduction::Max;

  std::size_t pair_cap = 0;
  std::size_t validation_pair_cap = 0;
  std::size_t max_words = 512;
  std::size_t batch_size = 32;
  RetryPolicy retry;
  unsigned threads = 0;  // 0: one per hardware thread

  double stats_exact_budget = 2.5e11;
  std::size_t stats_sample_pairs = 1'000'000;
  bool stats_force_sampled = false;

  std::size_t synthetic_dim = 64;
  double synthetic_global_weight = 0.0;
  std::vector<TokenId> synthetic_sticky_ids;  // empty with the toy tokenizer: the planted ids
  double synthetic_sticky_weight = 1000.0;
  std::vector<TokenId> synthetic_null_ids;

  std::string corpus_docs;  // empty with the toy tokenizer: toy corpus
  std::string corpus_queries;
  std::string corpus_qrels;
  InsertionSide impact_side = InsertionSide::End;
  bool impact_perturb_queries = false;
  std::vector<TokenId> impact_sticky_ids;  // empty: read Omega from report.json in the output directory
  std::size_t impact_normal_count = 0;     // 0: as many as sticky tokens

  std::size_t sweep_n_max = 16;
  std::vector<TokenId> sweep_tokens;  // empty: the validated set from report.json
  std::size_t sweep_pairs = 5;

  std::string out = "sticky-out";

  // Throws ConfigError on unknown keys, unparsable values, or invariant
  // violations (n >= 1, k >= 1, gamma > 0, 0 < shortlist_fraction <= 1).
  static PipelineConfig from_map(const ConfigMap& m);
  ConfigMap to_map() const;
  void check() const;

  // Sorted key=value lines over every setting that can change results
  // (threads and out are left out).
  std::string canonical() const;
  // Hex SHA-256 of canonical().
  std::string digest() const;

  StatsOptions stats_options() const;
  ValidationParams validation_params() const;
  SyntheticProviderConfig synthetic_config() const;
};

// File (if any), then environment, then explicit overrides.
PipelineConfig load_config(const std::optional<std::string>& path, const ConfigMap& overrides,
                           const std::map<std::string, std::string>* environment = nullptr);

std::vector<std::string> known_config_keys();

std::string sha256_hex(const std::string& data);

}  // namespace sticky
