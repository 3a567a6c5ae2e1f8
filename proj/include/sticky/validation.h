#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "sticky/corpus.h"
#include "sticky/embedding.h"
#include "sticky/insertion.h"
#include "sticky/tokenizer.h"

namespace sticky {

// How per-(pair, op) deviations fold into one G per token. Max makes
// "G <= epsilon" the same as checking every evaluation; Mean is for comparison.
enum class GReduction { Max, Mean };

std::string_view to_string(GReduction r);
GReduction g_reduction_from_string(std::string_view s);

struct ValidationParams {
  std::size_t n = 8;
  double iqr_alpha = 1.5;
  GReduction reduction = GReduction::Max;
  // Supplied threshold: skips the adaptive pass and allows early exit.
  std::optional<double> epsilon;
  std::size_t pair_cap = 0;  // 0 = every filtered pair
  std::uint64_t master_seed = 0;
  bool keep_trace = true;
};

struct Evaluation {
  std::size_t pair_index = 0;
  InsertionKind kind = InsertionKind::Prefix;
  double similarity = 0.0;  // Sim(s1, I(s2, t, n))
  double deviation = 0.0;   // |similarity - u|
};

struct ValidationResult {
  TokenId token_id = 0;
  double g_value = 0.0;
  bool passed = false;
  std::size_t evaluations = 0;
  bool early_exit = false;  // streaming stopped at the first deviation above epsilon
  std::vector<Evaluation> trace;
};

struct ThresholdReport {
  double q1 = 0.0;
  double q3 = 0.0;
  double iqr = 0.0;
  double alpha = 1.5;
  double epsilon = 0.0;
  bool supplied = false;  // epsilon came from configuration, quartiles unset
};

struct Candidate {
  TokenId id = 0;
  std::string surface;
};

struct ValidationOutcome {
  std::vector<ValidationResult> results;  // candidate order
  std::optional<ThresholdReport> threshold;  // unset when there were no candidates
  std::vector<TokenId> omega;               // ascending
};

// Sorted-sample quantile with linear interpolation at position (n - 1) * q.
double quantile_linear(std::span<const double> sorted, double q);

// epsilon = Q3 + alpha * IQR. Throws InsufficientDataError with fewer than 4 values.
ThresholdReport adaptive_threshold(std::span<const double> g_values, double alpha = 1.5);

// Deviation of every (pair, op) for one token, reduced to G. With
// `stop_above`, evaluation stops at the first deviation exceeding it.
ValidationResult compute_g(TokenId token_id, std::string_view surface, const std::vector<SentencePair>& filtered,
                           double u, const EmbeddingGateway& gateway, const ValidationParams& params,
                           std::optional<double> stop_above = std::nullopt);

// Pass 1 computes G for every candidate; pass 2 derives epsilon (unless
// supplied) and keeps candidates with G <= epsilon. A supplied epsilon with
// Max reduction switches pass 1 to early exit.
ValidationOutcome validate(const std::vector<Candidate>& candidates, const std::vector<SentencePair>& filtered,
                           double u, const EmbeddingGateway& gateway, const ValidationParams& params,
                           unsigned threads = 1);

// Omega from stored G values alone.
std::vector<TokenId> rederive_omega(const std::vector<ValidationResult>& results, double epsilon);

void write_validation_csv(std::ostream& out, const std::vector<ValidationResult>& results,
                          const std::vector<Candidate>& candidates);

nlohmann::json to_json(const ThresholdReport& t);
ThresholdReport threshold_report_from_json(const nlohmann::json& j);

inline constexpr std::string_view kUpperFenceNote =
    "epsilon = Q3 + alpha*IQR is an upper fence over candidate deviations, so validation only rejects "
    "shortlisted tokens whose worst-case deviation is an extreme outlier among the candidates";

}  // namespace sticky
