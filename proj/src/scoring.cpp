#include "sticky/scoring.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>

#include "sticky/error.h"
#include "sticky/parallel.h"
#include "sticky/rng.h"
#include "sticky/utf8.h"

namespace sticky {

double similarity_delta(const SentencePair& pair, std::string_view token, const InsertionOp& op, std::size_t n,
                        const EmbeddingGateway& gateway) {
  if (n < 1) throw Error("similarity_delta: n must be at least 1");
  const auto v = gateway.embed_batch({pair.s1, pair.s2, insert(op, pair.s2, token, n)});
  const double base = pair.baseline_sim ? *pair.baseline_sim : cosine(v[0], v[1]);
  return cosine(v[0], v[2]) - base;
}

OpScore aggregate_deltas(InsertionKind kind, std::span<const double> deltas, double penalty,
                         const ScoreParams& params) {
  if (deltas.empty()) throw Error("sticky score needs at least one sampled pair");
  if (!(params.gamma > 0.0)) throw ConfigError("gamma must be positive");
  OpScore s;
  s.kind = kind;
  s.deltas.assign(deltas.begin(), deltas.end());
  std::size_t pos = 0, neg = 0;
  for (double d : deltas) {
    s.m_plus += std::max(d, 0.0);
    s.m_minus += std::abs(std::min(d, 0.0));
    if (d > 0.0) ++pos;
    if (d < 0.0) ++neg;
  }
  const double k = static_cast<double>(deltas.size());
  s.f_plus = static_cast<double>(pos) / k;
  s.f_minus = static_cast<double>(neg) / k;
  s.sim_token_penalty = penalty;
  s.score = (s.m_plus + params.alpha * s.f_plus) /
            (s.m_minus + params.beta * s.f_minus + params.gamma + s.sim_token_penalty);
  return s;
}

std::vector<std::size_t> sample_pair_indices(std::size_t pool, std::size_t k, std::uint64_t seed) {
  std::vector<std::size_t> idx(pool);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (pool <= k) return idx;
  XorShift64Star rng(seed);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(pool - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  return idx;
}

std::uint64_t pair_sample_seed(std::uint64_t master_seed, TokenId token_id) {
  return derive_seed(master_seed, {static_cast<std::uint64_t>(token_id)});
}

StickyScoreBreakdown sticky_score(TokenId token_id, std::string_view surface,
                                  const std::vector<SentencePair>& filtered, const EmbeddingGateway& gateway,
                                  const ScoreParams& params) {
  if (params.k == 0) throw ConfigError("k must be at least 1");
  if (params.n == 0) throw ConfigError("n must be at least 1");
  if (filtered.empty()) throw InsufficientDataError("sticky score needs a non-empty filtered pair set");

  StickyScoreBreakdown out;
  out.token_id = token_id;
  out.n_insertions = params.n;
  out.sampled_pair_ids = sample_pair_indices(filtered.size(), params.k, pair_sample_seed(params.master_seed, token_id));
  const std::size_t k = out.sampled_pair_ids.size();
  const bool blank = utf8::trim(surface).empty();

  // Layout: [s1_j, s2_j] * k, then [ins(op, s2_j)] * 3k, then the token.
  std::vector<std::string> texts;
  texts.reserve(5 * k + 1);
  for (std::size_t j : out.sampled_pair_ids) {
    texts.push_back(filtered[j].s1);
    texts.push_back(filtered[j].s2);
  }
  for (InsertionKind kind : kAllInsertionKinds) {
    for (std::size_t j : out.sampled_pair_ids) {
      const auto op = stage_op(kind, params.master_seed, kScoringStage, token_id, j);
      texts.push_back(insert(op, filtered[j].s2, surface, params.n));
    }
  }
  if (!blank) texts.emplace_back(surface);
  const auto v = gateway.embed_batch(texts);

  double penalty = 0.0;
  if (!blank) {
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) sum += std::max(0.0, cosine(v[2 * j], v.back()));
    penalty = sum / static_cast<double>(k);
  }

  std::vector<double> deltas(k);
  for (std::size_t o = 0; o < kAllInsertionKinds.size(); ++o) {
    for (std::size_t j = 0; j < k; ++j) {
      const SentencePair& pair = filtered[out.sampled_pair_ids[j]];
      const double base = pair.baseline_sim ? *pair.baseline_sim : cosine(v[2 * j], v[2 * j + 1]);
      deltas[j] = cosine(v[2 * j], v[2 * k + o * k + j]) - base;
    }
    out.per_op[o] = aggregate_deltas(kAllInsertionKinds[o], deltas, penalty, params);
    out.total += out.per_op[o].score;
  }
  return out;
}

std::vector<StickyScoreBreakdown> score_vocabulary(const ClassifiedVocabulary& vocab,
                                                   const std::vector<SentencePair>& filtered,
                                                   const EmbeddingGateway& gateway, const ScoreParams& params,
                                                   unsigned threads) {
  std::vector<StickyScoreBreakdown> out(vocab.valid_ids.size());
  parallel_for(out.size(), threads, [&](std::size_t i) {
    const TokenId id = vocab.valid_ids[i];
    out[i] = sticky_score(id, *vocab.at(id).surface, filtered, gateway, params);
  });
  return out;
}

std::size_t shortlist_size(std::size_t valid_count, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw ConfigError("shortlist fraction must be in (0, 1]");
  const long double x = static_cast<long double>(fraction) * static_cast<long double>(valid_count);
  const long double floor_x = std::floor(x);
  // 0.02 is not exact in binary; treat x within 1e-9 of an integer as that integer.
  if (x - floor_x <= 1e-9L) return static_cast<std::size_t>(floor_x);
  return static_cast<std::size_t>(floor_x) + 1;
}

std::vector<TokenId> shortlist(const std::vector<StickyScoreBreakdown>& scores, double fraction) {
  const std::size_t m = std::min(scores.size(), shortlist_size(scores.size(), fraction));
  std::vector<const StickyScoreBreakdown*> order;
  order.reserve(scores.size());
  for (const auto& s : scores) order.push_back(&s);
  auto better = [](const StickyScoreBreakdown* a, const StickyScoreBreakdown* b) {
    if (a->total != b->total) return a->total > b->total;
    return a->token_id < b->token_id;
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m), order.end(), better);
  std::vector<TokenId> out;
  out.reserve(m);
  for (std::size_t i = 0; i < m; ++i) out.push_back(order[i]->token_id);
  return out;
}

std::string csv_escape(std::string_view field) {
  const bool quote = field.find_first_of(",\"\n\r") != std::string_view::npos ||
                     (!field.empty() && (field.front() == ' ' || field.back() == ' '));
  if (!quote) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void write_scores_csv(std::ostream& out, const std::vector<StickyScoreBreakdown>& scores,
                      const ClassifiedVocabulary& vocab) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a].total != scores[b].total) return scores[a].total > scores[b].total;
    return scores[a].token_id < scores[b].token_id;
  });
  std::vector<std::size_t> rank(scores.size());
  for (std::size_t r = 0; r < order.size(); ++r) rank[order[r]] = r + 1;

  out << "token_id,surface";
  for (InsertionKind kind : kAllInsertionKinds) {
    const std::string p(to_string(kind));
    out << ',' << p << "_m_plus," << p << "_m_minus," << p << "_f_plus," << p << "_f_minus," << p << "_penalty,"
        << p << "_score";
  }
  out << ",total,rank\n";
  out << std::setprecision(12);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const auto& s = scores[i];
    out << s.token_id << ',' << csv_escape(vocab.at(s.token_id).surface.value_or(""));
    for (const auto& op : s.per_op) {
      out << ',' << op.m_plus << ',' << op.m_minus << ',' << op.f_plus << ',' << op.f_minus << ','
          << op.sim_token_penalty << ',' << op.score;
    }
    out << ',' << s.total << ',' << rank[i] << '\n';
  }
}

}  // namespace sticky
