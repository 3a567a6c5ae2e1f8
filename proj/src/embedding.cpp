#include "sticky/embedding.h"

#include <cmath>
#include <unordered_set>

#include "sticky/error.h"
#include "sticky/utf8.h"

namespace sticky {

EmbeddingVector EmbeddingVector::normalized(std::vector<double> raw) {
  double sq = 0.0;
  for (double x : raw) sq += x * x;
  const double n = std::sqrt(sq);
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw Error("cannot normalize embedding: norm is " + std::to_string(n));
  }
  for (double& x : raw) x /= n;
  return EmbeddingVector(std::move(raw));
}

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw Error("cosine: dimension mismatch (" + std::to_string(u.size()) + " vs " +
                std::to_string(v.size()) + ")");
  }
  double dot = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) dot += u[i] * v[i];
  return dot;
}

double cosine(const EmbeddingVector& u, const EmbeddingVector& v) { return cosine(u.values(), v.values()); }

nlohmann::json to_json(const ProviderInfo& info) {
  return {{"name", info.name},
          {"dim", info.dim},
          {"normalizes", info.normalizes},
          {"deterministic", info.deterministic}};
}

EmbeddingGateway::EmbeddingGateway(std::shared_ptr<const EmbeddingProvider> provider, GatewayOptions options)
    : provider_(std::move(provider)), options_(options) {
  if (!provider_) throw ConfigError("embedding gateway requires a provider");
  if (options_.batch_size == 0) throw ConfigError("batch_size must be positive");
  info_ = provider_->info();
  if (info_.dim == 0) throw Error("provider reports dim 0");
}

std::size_t EmbeddingGateway::cache_size() const {
  std::shared_lock lock(cache_mu_);
  return cache_.size();
}

std::vector<EmbeddingVector> EmbeddingGateway::fetch(const std::vector<std::string>& texts) const {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (std::size_t start = 0; start < texts.size(); start += options_.batch_size) {
    const std::size_t end = std::min(texts.size(), start + options_.batch_size);
    std::vector<std::string> batch(texts.begin() + static_cast<std::ptrdiff_t>(start),
                                   texts.begin() + static_cast<std::ptrdiff_t>(end));
    std::vector<std::vector<double>> raw;
    with_retry(options_.retry, [&] {
      std::unique_lock<std::mutex> flight(flight_mu_, std::defer_lock);
      if (info_.single_flight) flight.lock();
      ++provider_calls_;
      raw = provider_->embed(batch);
    });
    if (raw.size() != batch.size()) {
      throw TransportError("provider returned " + std::to_string(raw.size()) + " vectors for " +
                           std::to_string(batch.size()) + " texts");
    }
    for (auto& v : raw) {
      if (v.size() != info_.dim) {
        throw TransportError("provider returned a vector of dim " + std::to_string(v.size()) + ", expected " +
                             std::to_string(info_.dim));
      }
      // Renormalize unconditionally: providers that claim to normalize are
      // still only accurate to float precision.
      out.push_back(EmbeddingVector::normalized(std::move(v)));
    }
  }
  return out;
}

std::vector<EmbeddingVector> EmbeddingGateway::embed_batch(const std::vector<std::string>& texts) const {
  for (const auto& t : texts) {
    if (utf8::trim(t).empty()) throw Error("embed_batch: text is empty after trimming");
  }
  std::vector<EmbeddingVector> out(texts.size());
  std::vector<std::string> misses;
  std::unordered_map<std::string, std::vector<std::size_t>> slots;
  {
    std::shared_lock lock(cache_mu_);
    for (std::size_t i = 0; i < texts.size(); ++i) {
      if (options_.cache) {
        if (auto it = cache_.find(texts[i]); it != cache_.end()) {
          out[i] = it->second;
          continue;
        }
      }
      auto [it, fresh] = slots.try_emplace(texts[i]);
      if (fresh) misses.push_back(texts[i]);
      it->second.push_back(i);
    }
  }
  if (misses.empty()) return out;
  auto fetched = fetch(misses);
  if (options_.cache) {
    std::unique_lock lock(cache_mu_);
    for (std::size_t m = 0; m < misses.size(); ++m) cache_.try_emplace(misses[m], fetched[m]);
  }
  for (std::size_t m = 0; m < misses.size(); ++m) {
    for (std::size_t i : slots[misses[m]]) out[i] = fetched[m];
  }
  return out;
}

EmbeddingVector EmbeddingGateway::embed(const std::string& text) const { return embed_batch({text}).front(); }

}  // namespace sticky
