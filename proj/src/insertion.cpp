#include "sticky/insertion.h"

#include <algorithm>
#include <iomanip>

#include "sticky/error.h"
#include "sticky/rng.h"
#include "sticky/utf8.h"

namespace sticky {

std::string_view to_string(InsertionKind kind) {
  switch (kind) {
    case InsertionKind::Prefix: return "prefix";
    case InsertionKind::Suffix: return "suffix";
    case InsertionKind::Random: return "random";
  }
  return "prefix";
}

InsertionKind insertion_kind_from_string(std::string_view s) {
  if (s == "prefix") return InsertionKind::Prefix;
  if (s == "suffix") return InsertionKind::Suffix;
  if (s == "random") return InsertionKind::Random;
  throw ConfigError("unknown insertion op: " + std::string(s));
}

std::string insert(const InsertionOp& op, std::string_view s, std::string_view token, std::size_t n) {
  if (n == 0) return std::string(s);
  std::string out;
  switch (op.kind) {
    case InsertionKind::Prefix:
      for (std::size_t i = 0; i < n; ++i) {
        if (i) out += ' ';
        out += token;
      }
      if (!s.empty()) {
        out += ' ';
        out += s;
      }
      return out;
    case InsertionKind::Suffix:
      out = s;
      for (std::size_t i = 0; i < n; ++i) {
        if (!out.empty()) out += ' ';
        out += token;
      }
      return out;
    case InsertionKind::Random:
      break;
  }
  const auto words = utf8::split_whitespace(s);
  XorShift64Star rng(op.rng_seed);
  std::vector<std::size_t> gaps(n);
  for (auto& g : gaps) g = static_cast<std::size_t>(rng.below(words.size() + 1));
  std::sort(gaps.begin(), gaps.end());
  std::size_t next_gap = 0;
  auto append = [&](std::string_view piece) {
    if (!out.empty()) out += ' ';
    out += piece;
  };
  for (std::size_t w = 0; w <= words.size(); ++w) {
    while (next_gap < gaps.size() && gaps[next_gap] == w) {
      append(token);
      ++next_gap;
    }
    if (w < words.size()) append(words[w]);
  }
  return out;
}

InsertionOp stage_op(InsertionKind kind, std::uint64_t master_seed, std::uint64_t stage, std::int64_t token_id,
                     std::size_t pair_index) {
  if (kind != InsertionKind::Random) return {kind, 0};
  return InsertionOp::random(derive_seed(master_seed, {stage, static_cast<std::uint64_t>(token_id),
                                                       static_cast<std::uint64_t>(pair_index),
                                                       static_cast<std::uint64_t>(kind)}));
}

std::vector<SweepPoint> sweep(const SentencePair& pair, std::string_view token, const InsertionOp& op,
                              std::size_t n_max, const EmbeddingGateway& gateway) {
  if (n_max < 1) throw Error("sweep: n_max must be at least 1");
  std::vector<std::string> texts{pair.s1, pair.s2};
  for (std::size_t n = 1; n <= n_max; ++n) texts.push_back(insert(op, pair.s2, token, n));
  const auto v = gateway.embed_batch(texts);
  std::vector<SweepPoint> out;
  out.push_back({0, pair.baseline_sim ? *pair.baseline_sim : cosine(v[0], v[1])});
  for (std::size_t n = 1; n <= n_max; ++n) out.push_back({n, cosine(v[0], v[n + 1])});
  return out;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepPoint>& points) {
  out << "n,similarity\n";
  for (const auto& p : points) out << p.n << ',' << std::setprecision(17) << p.similarity << '\n';
}

}  // namespace sticky
