#include "sticky/synthetic_provider.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sticky/error.h"
#include "sticky/rng.h"
#include "sticky/utf8.h"

namespace sticky {

namespace {

constexpr std::uint64_t kGlobalDomain = 0x676C6F62616CULL;  // "global"
constexpr std::uint64_t kTokenDomain = 0x746F6B656EULL;     // "token"
constexpr std::uint64_t kPseudoBit = std::uint64_t{1} << 40;

std::vector<double> gaussian_unit(std::uint64_t seed, std::size_t dim) {
  XorShift64Star rng(seed);
  std::vector<double> v(dim);
  for (std::size_t i = 0; i < dim; i += 2) {
    const double u1 = 1.0 - rng.uniform();  // (0, 1]
    const double u2 = rng.uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    v[i] = r * std::cos(2.0 * std::numbers::pi * u2);
    if (i + 1 < dim) v[i + 1] = r * std::sin(2.0 * std::numbers::pi * u2);
  }
  double n = 0.0;
  for (double x : v) n += x * x;
  n = std::sqrt(n);
  for (double& x : v) x /= n;
  return v;
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

SyntheticProvider::SyntheticProvider(SyntheticProviderConfig config,
                                     std::unordered_map<std::string, TokenId> vocabulary)
    : config_(std::move(config)), vocabulary_(std::move(vocabulary)) {
  if (config_.dim < 2) throw ConfigError("synthetic dim must be at least 2");
  if (!(config_.global_direction_weight >= 0.0 && config_.global_direction_weight < 1.0)) {
    throw ConfigError("synthetic global_direction_weight must be in [0, 1)");
  }
  if (!(config_.sticky_pool_weight > 0.0)) throw ConfigError("synthetic sticky_pool_weight must be positive");
  global_ = gaussian_unit(derive_seed(config_.master_seed, {kGlobalDomain}), config_.dim);
  sticky_sorted_ = config_.sticky_ids;
  std::sort(sticky_sorted_.begin(), sticky_sorted_.end());
  null_sorted_ = config_.null_ids;
  std::sort(null_sorted_.begin(), null_sorted_.end());
  for (const auto& [word, id] : vocabulary_) {
    const auto key = static_cast<std::uint64_t>(id);
    if (!precomputed_.contains(key)) precomputed_.emplace(key, fresh_token_vector(key));
  }
}

ProviderInfo SyntheticProvider::info() const {
  ProviderInfo i;
  i.name = "synthetic";
  i.dim = config_.dim;
  i.normalizes = true;
  i.deterministic = true;
  return i;
}

std::uint64_t SyntheticProvider::word_key(std::string_view word) const {
  if (auto it = vocabulary_.find(std::string(word)); it != vocabulary_.end()) {
    return static_cast<std::uint64_t>(it->second);
  }
  return kPseudoBit | (mix64(fnv1a(word)) & (kPseudoBit - 1));
}

double SyntheticProvider::pool_weight(std::uint64_t key) const {
  if (key < kPseudoBit) {
    const auto id = static_cast<TokenId>(key);
    if (std::binary_search(sticky_sorted_.begin(), sticky_sorted_.end(), id)) return config_.sticky_pool_weight;
    if (std::binary_search(null_sorted_.begin(), null_sorted_.end(), id)) return 0.0;
  }
  return 1.0;
}

std::vector<double> SyntheticProvider::fresh_token_vector(std::uint64_t key) const {
  if (key < kPseudoBit &&
      std::binary_search(sticky_sorted_.begin(), sticky_sorted_.end(), static_cast<TokenId>(key))) {
    return global_;
  }
  std::vector<double> h = gaussian_unit(derive_seed(config_.master_seed, {kTokenDomain, key}), config_.dim);
  const double along = cosine(h, global_);
  double n = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    h[i] -= along * global_[i];
    n += h[i] * h[i];
  }
  n = std::sqrt(n);
  const double a = config_.global_direction_weight;
  const double b = std::sqrt(1.0 - a * a);
  for (std::size_t i = 0; i < h.size(); ++i) h[i] = a * global_[i] + b * h[i] / n;
  return h;
}

std::vector<double> SyntheticProvider::token_vector(std::uint64_t key) const {
  if (auto it = precomputed_.find(key); it != precomputed_.end()) return it->second;
  return fresh_token_vector(key);
}

std::vector<double> SyntheticProvider::pooled(std::string_view text) const {
  std::vector<double> acc(config_.dim, 0.0);
  double total = 0.0;
  for (const auto& word : utf8::split_whitespace(text)) {
    const auto key = word_key(word);
    const double w = pool_weight(key);
    if (w == 0.0) continue;
    const auto it = precomputed_.find(key);
    const std::vector<double> fresh = it == precomputed_.end() ? fresh_token_vector(key) : std::vector<double>{};
    const std::vector<double>& v = it == precomputed_.end() ? fresh : it->second;
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += w * v[i];
    total += w;
  }
  if (total > 0.0) {
    for (double& x : acc) x /= total;
  }
  return acc;
}

std::vector<std::vector<double>> SyntheticProvider::embed(const std::vector<std::string>& texts) const {
  std::vector<std::vector<double>> out;
  out.reserve(texts.size());
  for (const auto& t : texts) {
    auto v = pooled(t);
    double n = 0.0;
    for (double x : v) n += x * x;
    n = std::sqrt(n);
    if (n > 0.0) {
      for (double& x : v) x /= n;
    }
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace sticky
