#pragma once

#include <array>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sticky/corpus.h"
#include "sticky/embedding.h"
#include "sticky/insertion.h"
#include "sticky/tokenizer.h"

namespace sticky {

struct ScoreParams {
  double alpha = 1.0;   // weight of F+
  double beta = 1.0;    // weight of F-
  double gamma = 1e-8;  // keeps the denominator positive
  std::size_t n = 8;    // insertions per sentence
  std::size_t k = 5;    // sampled pairs per token
  std::uint64_t master_seed = 0;
};

struct OpScore {
  InsertionKind kind = InsertionKind::Prefix;
  double m_plus = 0.0;
  double m_minus = 0.0;
  double f_plus = 0.0;
  double f_minus = 0.0;
  double sim_token_penalty = 0.0;
  double score = 0.0;
  std::vector<double> deltas;
};

struct StickyScoreBreakdown {
  TokenId token_id = 0;
  std::array<OpScore, 3> per_op;
  double total = 0.0;
  std::vector<std::size_t> sampled_pair_ids;  // indices into the filtered pair set
  std::size_t n_insertions = 0;
};

// Sim(s1, I(s2, t, n)) - Sim(s1, s2); uses the cached baseline when present.
double similarity_delta(const SentencePair& pair, std::string_view token, const InsertionOp& op, std::size_t n,
                        const EmbeddingGateway& gateway);

// (M+ + alpha F+) / (M- + beta F- + gamma + penalty) over one op's deltas.
// Zero deltas count toward neither F+ nor F-. `penalty` is already clamped.
OpScore aggregate_deltas(InsertionKind kind, std::span<const double> deltas, double penalty,
                         const ScoreParams& params);

// k distinct indices from [0, pool) by partial Fisher-Yates over
// XorShift64Star(seed); all of them (in order) when pool <= k.
std::vector<std::size_t> sample_pair_indices(std::size_t pool, std::size_t k, std::uint64_t seed);

// Pair sample seed for a token: derive_seed(master, {token_id}).
std::uint64_t pair_sample_seed(std::uint64_t master_seed, TokenId token_id);

// Scores one token over min(k, |filtered|) pairs sampled from `filtered` with
// pair_sample_seed. The penalty is mean_j max(0, Sim(E(s1_j), E(t))); it is 0
// for whitespace-only surfaces, which cannot be embedded alone.
StickyScoreBreakdown sticky_score(TokenId token_id, std::string_view surface,
                                  const std::vector<SentencePair>& filtered, const EmbeddingGateway& gateway,
                                  const ScoreParams& params);

// One breakdown per valid id, in valid_ids order.
std::vector<StickyScoreBreakdown> score_vocabulary(const ClassifiedVocabulary& vocab,
                                                   const std::vector<SentencePair>& filtered,
                                                   const EmbeddingGateway& gateway, const ScoreParams& params,
                                                   unsigned threads = 1);

// ceil(fraction * valid_count), robust to fraction*count landing a hair above
// an integer in floating point.
std::size_t shortlist_size(std::size_t valid_count, double fraction = 0.02);

// Top shortlist_size(|scores|) by descending total, ties by ascending id.
std::vector<TokenId> shortlist(const std::vector<StickyScoreBreakdown>& scores, double fraction = 0.02);

// token_id,surface,<op>_m_plus,...,total,rank (rank 1 = highest).
void write_scores_csv(std::ostream& out, const std::vector<StickyScoreBreakdown>& scores,
                      const ClassifiedVocabulary& vocab);

std::string csv_escape(std::string_view field);

}  // namespace sticky
