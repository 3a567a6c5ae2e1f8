#pragma once

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "sticky/embedding.h"
#include "sticky/geometry.h"

namespace sticky {

struct SentencePair {
  std::string s1;
  std::string s2;  // insertions always target s2
  std::optional<double> baseline_sim;
  std::string source_tag;
};

enum class PairFormat { Jsonl, Tsv };

// .jsonl/.json -> Jsonl, anything else -> Tsv.
PairFormat pair_format_for_path(const std::string& path);
PairFormat pair_format_from_string(const std::string& s);

struct PairLoadOptions {
  std::size_t max_words = 512;  // per sentence, whitespace words
};

struct LoadedPairs {
  std::vector<SentencePair> pairs;
  std::size_t lines = 0;
  std::size_t duplicates = 0;
  std::size_t rejected_too_long = 0;
};

// JSONL lines {"s1": ..., "s2": ...} or two tab-separated columns. Blank
// lines are skipped. Pairs are deduplicated on exact (s1, s2) bytes and keep
// first-seen order. Throws DataError on a malformed line (with its number) or
// when the input holds no pairs.
LoadedPairs parse_pairs(std::istream& in, PairFormat format, const std::string& source_tag,
                        const PairLoadOptions& options = {});
LoadedPairs load_pairs(const std::string& path, PairFormat format, const PairLoadOptions& options = {});

struct FilterResult {
  std::vector<SentencePair> filtered;  // baseline_sim < u, input order
  std::size_t evaluated = 0;
  std::size_t below_mean = 0;  // before the cap
  std::optional<std::string> warning;
};

// Computes and caches baseline similarity for every pair, keeping those
// strictly below stats.u. cap == 0 means unlimited.
FilterResult filter_pairs(std::vector<SentencePair>& pairs, const ModelStats& stats,
                          const EmbeddingGateway& gateway, std::size_t cap = 0);

double pair_similarity(const SentencePair& pair, const EmbeddingGateway& gateway);

void write_pairs_jsonl(std::ostream& out, const std::vector<SentencePair>& pairs);

}  // namespace sticky
