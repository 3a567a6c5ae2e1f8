#include "sticky/validation.h"

#include <algorithm>
#include <cmath>
#include <iomanip>

#include "sticky/error.h"
#include "sticky/parallel.h"
#include "sticky/scoring.h"

namespace sticky {

std::string_view to_string(GReduction r) { return r == GReduction::Max ? "max" : "mean"; }

GReduction g_reduction_from_string(std::string_view s) {
  if (s == "max") return GReduction::Max;
  if (s == "mean") return GReduction::Mean;
  throw ConfigError("unknown G reduction '" + std::string(s) + "' (expected max or mean)");
}

double quantile_linear(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw Error("quantile of an empty sample");
  const double pos = static_cast<double>(sorted.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

ThresholdReport adaptive_threshold(std::span<const double> g_values, double alpha) {
  if (g_values.size() < 4) {
    throw InsufficientDataError("adaptive threshold needs at least 4 candidate G values, got " +
                                std::to_string(g_values.size()) + "; set epsilon explicitly");
  }
  std::vector<double> sorted(g_values.begin(), g_values.end());
  std::sort(sorted.begin(), sorted.end());
  ThresholdReport t;
  t.alpha = alpha;
  t.q1 = quantile_linear(sorted, 0.25);
  t.q3 = quantile_linear(sorted, 0.75);
  t.iqr = t.q3 - t.q1;
  t.epsilon = t.q3 + alpha * t.iqr;
  return t;
}

ValidationResult compute_g(TokenId token_id, std::string_view surface, const std::vector<SentencePair>& filtered,
                           double u, const EmbeddingGateway& gateway, const ValidationParams& params,
                           std::optional<double> stop_above) {
  if (filtered.empty()) throw InsufficientDataError("validation needs a non-empty filtered pair set");
  if (params.n == 0) throw ConfigError("n must be at least 1");
  const std::size_t pairs =
      params.pair_cap == 0 ? filtered.size() : std::min(params.pair_cap, filtered.size());

  ValidationResult r;
  r.token_id = token_id;
  double sum = 0.0;
  // One pair per batch keeps early exit cheap; the gateway caches s1.
  for (std::size_t j = 0; j < pairs; ++j) {
    const SentencePair& pair = filtered[j];
    std::vector<std::string> texts{pair.s1};
    for (InsertionKind kind : kAllInsertionKinds) {
      texts.push_back(insert(stage_op(kind, params.master_seed, kValidationStage, token_id, j), pair.s2, surface,
                             params.n));
    }
    const auto v = gateway.embed_batch(texts);
    for (std::size_t o = 0; o < kAllInsertionKinds.size(); ++o) {
      Evaluation e{j, kAllInsertionKinds[o], cosine(v[0], v[o + 1]), 0.0};
      e.deviation = std::abs(e.similarity - u);
      ++r.evaluations;
      sum += e.deviation;
      r.g_value = std::max(r.g_value, e.deviation);
      if (params.keep_trace) r.trace.push_back(e);
      if (stop_above && e.deviation > *stop_above) {
        r.early_exit = true;
        return r;
      }
    }
  }
  if (params.reduction == GReduction::Mean) r.g_value = sum / static_cast<double>(r.evaluations);
  return r;
}

ValidationOutcome validate(const std::vector<Candidate>& candidates, const std::vector<SentencePair>& filtered,
                           double u, const EmbeddingGateway& gateway, const ValidationParams& params,
                           unsigned threads) {
  ValidationOutcome out;
  if (candidates.empty()) return out;

  const bool streaming = params.epsilon.has_value() && params.reduction == GReduction::Max;
  out.results.resize(candidates.size());
  parallel_for(candidates.size(), threads, [&](std::size_t i) {
    out.results[i] = compute_g(candidates[i].id, candidates[i].surface, filtered, u, gateway, params,
                               streaming ? params.epsilon : std::nullopt);
  });

  if (params.epsilon) {
    ThresholdReport t;
    t.alpha = params.iqr_alpha;
    t.epsilon = *params.epsilon;
    t.supplied = true;
    out.threshold = t;
  } else {
    std::vector<double> g;
    g.reserve(out.results.size());
    for (const auto& r : out.results) g.push_back(r.g_value);
    out.threshold = adaptive_threshold(g, params.iqr_alpha);
  }
  for (auto& r : out.results) r.passed = r.g_value <= out.threshold->epsilon;
  out.omega = rederive_omega(out.results, out.threshold->epsilon);
  return out;
}

std::vector<TokenId> rederive_omega(const std::vector<ValidationResult>& results, double epsilon) {
  std::vector<TokenId> omega;
  for (const auto& r : results) {
    if (r.g_value <= epsilon) omega.push_back(r.token_id);
  }
  std::sort(omega.begin(), omega.end());
  return omega;
}

void write_validation_csv(std::ostream& out, const std::vector<ValidationResult>& results,
                          const std::vector<Candidate>& candidates) {
  out << "token_id,surface,G,passed\n" << std::setprecision(12);
  for (std::size_t i = 0; i < results.size(); ++i) {
    out << results[i].token_id << ',' << csv_escape(candidates.at(i).surface) << ',' << results[i].g_value << ','
        << (results[i].passed ? "true" : "false") << '\n';
  }
}

nlohmann::json to_json(const ThresholdReport& t) {
  nlohmann::json j{{"alpha", t.alpha}, {"epsilon", t.epsilon}, {"supplied", t.supplied}};
  if (!t.supplied) {
    j["q1"] = t.q1;
    j["q3"] = t.q3;
    j["iqr"] = t.iqr;
  }
  return j;
}

ThresholdReport threshold_report_from_json(const nlohmann::json& j) {
  ThresholdReport t;
  t.alpha = j.at("alpha").get<double>();
  t.epsilon = j.at("epsilon").get<double>();
  t.supplied = j.value("supplied", false);
  if (!t.supplied) {
    t.q1 = j.at("q1").get<double>();
    t.q3 = j.at("q3").get<double>();
    t.iqr = j.at("iqr").get<double>();
  }
  return t;
}

}  // namespace sticky
