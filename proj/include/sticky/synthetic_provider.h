#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sticky/embedding.h"
#include "sticky/tokenizer.h"

namespace sticky {

struct SyntheticProviderConfig {
  std::size_t dim = 64;
  // Share of every ordinary token vector along the global direction, in [0, 1).
  double global_direction_weight = 0.0;
  // Planted sticky ids: embed exactly along the global direction and carry
  // sticky_pool_weight in the pooled mean.
  std::vector<TokenId> sticky_ids;
  double sticky_pool_weight = 1000.0;
  // Ids with pooling weight 0 (inserting them changes nothing).
  std::vector<TokenId> null_ids;
  std::uint64_t master_seed = 0;
};

// Deterministic offline provider. Text is split on whitespace; each word maps
// to its vocabulary id or, if unknown, to a stable hashed pseudo-id. Token
// vectors are v = a*g + sqrt(1 - a^2)*h with g a seeded unit direction and h a
// seeded unit vector orthogonal to g. A sentence embeds as the normalized
// weighted mean of its token vectors.
class SyntheticProvider final : public EmbeddingProvider {
 public:
  SyntheticProvider(SyntheticProviderConfig config, std::unordered_map<std::string, TokenId> vocabulary);

  ProviderInfo info() const override;
  std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) const override;

  // Word key: vocabulary id, or (1 << 40) | hash for unknown words.
  std::uint64_t word_key(std::string_view word) const;
  std::vector<double> token_vector(std::uint64_t key) const;
  double pool_weight(std::uint64_t key) const;
  const std::vector<double>& global_direction() const { return global_; }
  const SyntheticProviderConfig& config() const { return config_; }

  // Unnormalized weighted mean; all-zero when every weight is zero.
  std::vector<double> pooled(std::string_view text) const;

 private:
  std::vector<double> fresh_token_vector(std::uint64_t key) const;

  SyntheticProviderConfig config_;
  std::unordered_map<std::string, TokenId> vocabulary_;
  std::vector<double> global_;
  std::unordered_map<std::uint64_t, std::vector<double>> precomputed_;
  std::vector<TokenId> sticky_sorted_;
  std::vector<TokenId> null_sorted_;
};

}  // namespace sticky
