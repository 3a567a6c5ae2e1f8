#pragma once

#include <array>
#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "sticky/corpus.h"
#include "sticky/embedding.h"

namespace sticky {

enum class InsertionKind { Prefix, Suffix, Random };

inline constexpr std::array<InsertionKind, 3> kAllInsertionKinds = {InsertionKind::Prefix, InsertionKind::Suffix,
                                                                     InsertionKind::Random};

std::string_view to_string(InsertionKind kind);
InsertionKind insertion_kind_from_string(std::string_view s);

struct InsertionOp {
  InsertionKind kind = InsertionKind::Prefix;
  std::uint64_t rng_seed = 0;  // Random only

  static InsertionOp prefix() { return {InsertionKind::Prefix, 0}; }
  static InsertionOp suffix() { return {InsertionKind::Suffix, 0}; }
  static InsertionOp random(std::uint64_t seed) { return {InsertionKind::Random, seed}; }
};

// n copies of `token` joined to `s` with single spaces.
//   Prefix: "t t ... t s"
//   Suffix: "s t t ... t"
//   Random: s is split into w whitespace words; n gap indices are drawn with
//           replacement from {0..w} by XorShift64Star(rng_seed).below(w + 1),
//           sorted, and a copy is spliced before word g (g == w: at the end).
// n == 0 returns s unchanged for every kind.
std::string insert(const InsertionOp& op, std::string_view s, std::string_view token, std::size_t n);

// The op used for (token, pair, kind) in a pipeline stage. Prefix/Suffix get
// seed 0; Random gets derive_seed(master, {stage, token, pair, kind}).
InsertionOp stage_op(InsertionKind kind, std::uint64_t master_seed, std::uint64_t stage, std::int64_t token_id,
                     std::size_t pair_index);

inline constexpr std::uint64_t kScoringStage = 0x73636F7265ULL;     // "score"
inline constexpr std::uint64_t kValidationStage = 0x76616C6964ULL;  // "valid"
inline constexpr std::uint64_t kSweepStage = 0x7377656570ULL;       // "sweep"

struct SweepPoint {
  std::size_t n = 0;
  double similarity = 0.0;
};

// Sim(s1, insert(op, s2, token, n)) for n = 0..n_max. The n = 0 point is the
// cached baseline when present.
std::vector<SweepPoint> sweep(const SentencePair& pair, std::string_view token, const InsertionOp& op,
                              std::size_t n_max, const EmbeddingGateway& gateway);

void write_sweep_csv(std::ostream& out, const std::vector<SweepPoint>& points);

}  // namespace sticky
