#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "sticky/embedding.h"
#include "sticky/error.h"
#include "sticky/tokenizer.h"

namespace sticky::testing {

// In-memory tokenizer: every vocabulary string is one whitespace word; text
// is split on single spaces. Entries can be marked undecodable or given raw
// bytes that differ from their lookup key.
class FakeTokenizer final : public Tokenizer {
 public:
  struct Entry {
    std::string key;                    // what encode() matches
    std::optional<std::string> bytes;   // what decode_bytes() returns
  };

  explicit FakeTokenizer(std::vector<Entry> entries, std::vector<TokenId> specials = {},
                         bool metaspace = false)
      : entries_(std::move(entries)), specials_(std::move(specials)), metaspace_(metaspace) {
    for (std::size_t i = 0; i < entries_.size(); ++i) index_.emplace(entries_[i].key, static_cast<TokenId>(i));
  }

  std::size_t vocab_size() const override { return entries_.size(); }
  std::optional<std::string> decode_bytes(TokenId id) const override { return entries_.at(id).bytes; }
  std::vector<TokenId> encode(std::string_view text) const override {
    std::vector<TokenId> out;
    std::string s(text);
    if (metaspace_) s = " " + s;  // SentencePiece-style prefix space
    std::size_t pos = 0;
    while (pos < s.size()) {
      std::size_t best = 0;
      TokenId best_id = kNoToken;
      for (const auto& [key, id] : index_) {
        if (key.size() > best && s.compare(pos, key.size(), key) == 0) {
          best = key.size();
          best_id = id;
        }
      }
      if (best == 0) {
        out.push_back(kNoToken);
        ++pos;
      } else {
        out.push_back(best_id);
        pos += best;
      }
    }
    return out;
  }
  std::vector<TokenId> declared_specials() const override { return specials_; }
  std::string source() const override { return "fake"; }

 private:
  std::vector<Entry> entries_;
  std::multimap<std::string, TokenId> index_;
  std::vector<TokenId> specials_;
  bool metaspace_;
};

// Provider returning preset vectors per exact text; unknown texts get a
// seeded random vector.
class TableProvider final : public EmbeddingProvider {
 public:
  explicit TableProvider(std::size_t dim, std::map<std::string, std::vector<double>> table = {})
      : dim_(dim), table_(std::move(table)) {}
  ProviderInfo info() const override { return {"table", dim_, false, true, false}; }
  std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) const override {
    ++calls;
    batch_sizes.push_back(texts.size());
    std::vector<std::vector<double>> out;
    for (const auto& t : texts) {
      if (auto it = table_.find(t); it != table_.end()) {
        out.push_back(it->second);
      } else {
        std::mt19937_64 rng(std::hash<std::string>{}(t));
        std::normal_distribution<double> g;
        std::vector<double> v(dim_);
        for (auto& x : v) x = g(rng);
        out.push_back(v);
      }
    }
    return out;
  }
  mutable std::atomic<int> calls{0};
  mutable std::vector<std::size_t> batch_sizes;

 private:
  std::size_t dim_;
  std::map<std::string, std::vector<double>> table_;
};

inline std::filesystem::path fresh_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("sticky_test_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace sticky::testing
