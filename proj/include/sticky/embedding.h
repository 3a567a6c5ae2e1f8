#pragma once

#include <atomic>
#include <cstddef>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "sticky/http.h"

namespace sticky {

// Unit-norm sentence embedding.
class EmbeddingVector {
 public:
  EmbeddingVector() = default;

  // Scales `raw` to unit length. Throws Error if the norm is zero or not finite.
  static EmbeddingVector normalized(std::vector<double> raw);

  std::span<const double> values() const { return values_; }
  std::size_t dim() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

  friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;

 private:
  explicit EmbeddingVector(std::vector<double> v) : values_(std::move(v)) {}
  std::vector<double> values_;
};

// Dot product of two unit vectors. Throws Error on dimension mismatch.
double cosine(const EmbeddingVector& u, const EmbeddingVector& v);
double cosine(std::span<const double> u, std::span<const double> v);

struct ProviderInfo {
  std::string name;
  std::size_t dim = 0;
  bool normalizes = false;
  bool deterministic = true;
  // Provider cannot take concurrent embed() calls; the gateway serializes.
  bool single_flight = false;
};

nlohmann::json to_json(const ProviderInfo& info);

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual ProviderInfo info() const = 0;
  // One raw vector per text, in order.
  virtual std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) const = 0;
};

struct GatewayOptions {
  std::size_t batch_size = 32;
  RetryPolicy retry;
  bool cache = true;
};

// Batching, retrying, normalizing and caching front for a provider. Safe for
// concurrent use.
class EmbeddingGateway {
 public:
  explicit EmbeddingGateway(std::shared_ptr<const EmbeddingProvider> provider, GatewayOptions options = {});

  // Texts must be non-empty after trimming (Error otherwise).
  std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) const;
  EmbeddingVector embed(const std::string& text) const;

  const ProviderInfo& info() const { return info_; }
  std::size_t cache_size() const;
  std::size_t provider_calls() const { return provider_calls_.load(); }

 private:
  std::vector<EmbeddingVector> fetch(const std::vector<std::string>& texts) const;

  std::shared_ptr<const EmbeddingProvider> provider_;
  GatewayOptions options_;
  ProviderInfo info_;
  mutable std::shared_mutex cache_mu_;
  mutable std::unordered_map<std::string, EmbeddingVector> cache_;
  mutable std::mutex flight_mu_;
  mutable std::atomic<std::size_t> provider_calls_{0};
};

// Client for POST /embed and GET /info.
class RemoteProvider final : public EmbeddingProvider {
 public:
  explicit RemoteProvider(std::string url, RetryPolicy retry = {});

  ProviderInfo info() const override { return info_; }
  std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) const override;

 private:
  std::string url_;
  Endpoint endpoint_;
  ProviderInfo info_;
};

}  // namespace sticky
