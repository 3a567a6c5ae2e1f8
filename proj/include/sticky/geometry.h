#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "sticky/embedding.h"
#include "sticky/tokenizer.h"

namespace sticky {

enum class StatsMethod { Exact, Sampled };

// Mean and population std of cosine similarity over distinct token pairs.
struct ModelStats {
  double u = 0.0;
  double sigma = 0.0;
  std::size_t n_tokens = 0;
  StatsMethod method = StatsMethod::Exact;
  std::optional<std::uint64_t> sample_seed;  // set iff method == Sampled
  std::size_t sampled_pairs = 0;
};

struct StatsOptions {
  // Exact mode costs O(N * d^2); above this we sample pairs instead.
  double exact_budget = 2.5e11;
  std::size_t sample_pairs = 1'000'000;
  std::uint64_t seed = 0;
  bool force_sampled = false;
  // Histogram enumerates all pairs up to this many, then samples.
  std::size_t histogram_pairs = 5'000'000;
};

// Throws Error when fewer than two vectors are given or any vector is not
// unit norm (tolerance 1e-6).
ModelStats mean_pairwise_similarity(std::span<const EmbeddingVector> vectors, const StatsOptions& options = {});

struct Histogram {
  double low = -1.0;
  double high = 1.0;
  std::vector<std::size_t> counts;  // 200 uniform bins by default
  bool sampled = false;

  double bin_low(std::size_t i) const;
  double bin_high(std::size_t i) const;
};

Histogram similarity_histogram(std::span<const EmbeddingVector> vectors, const StatsOptions& options = {},
                               std::size_t bins = 200);
void write_histogram_csv(std::ostream& out, const Histogram& h);

struct AnisotropyReport {
  ModelStats stats;
  Histogram histogram;
  std::vector<TokenId> embedded_ids;
  std::size_t skipped_blank = 0;  // valid tokens whose surface is whitespace only
};

// Embeds every valid token surface as its own text and summarizes the cloud.
AnisotropyReport anisotropy_report(const ClassifiedVocabulary& vocab, const EmbeddingGateway& gateway,
                                   const StatsOptions& options = {});
AnisotropyReport anisotropy_report(const TokenizerHandle& handle, const EmbeddingGateway& gateway,
                                   const StatsOptions& options = {}, unsigned threads = 1);

nlohmann::json to_json(const ModelStats& s);
ModelStats model_stats_from_json(const nlohmann::json& j);

}  // namespace sticky
