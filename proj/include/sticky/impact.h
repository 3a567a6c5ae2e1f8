#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "sticky/embedding.h"
#include "sticky/tokenizer.h"

namespace sticky {

struct RetrievalCorpus {
  std::map<std::string, std::string> documents;
  std::map<std::string, std::string> queries;
  // query id -> doc id -> relevance grade (>= 0)
  std::map<std::string, std::map<std::string, int>> qrels;

  // Throws DataError when a qrel references a missing id, a grade is negative,
  // or a query has no relevant document.
  void validate() const;
};

// docs {"id","text"}, queries {"id","text"}, qrels {"query_id","doc_id","relevance"}.
RetrievalCorpus load_corpus(const std::string& docs_path, const std::string& queries_path,
                            const std::string& qrels_path);
void write_corpus(const RetrievalCorpus& corpus, const std::string& docs_path, const std::string& queries_path,
                  const std::string& qrels_path);

enum class InsertionSide { Start, End };

std::string_view to_string(InsertionSide side);
InsertionSide insertion_side_from_string(std::string_view s);

// Copies inserted into a text of `words` whitespace words: ceil(words / 10).
std::size_t impact_copies(std::size_t words);

// Every document gets impact_copies(words) copies of one token, tokens
// assigned round-robin in document id order. Queries change only when
// perturb_queries is set (continuing the round-robin).
RetrievalCorpus perturb_corpus(const RetrievalCorpus& corpus, const std::vector<std::string>& tokens,
                               InsertionSide side, bool perturb_queries = false);

// nDCG@k of a ranked list of grades against all judged grades for the query.
// Gain is the grade, discount log2(rank + 1).
double ndcg_at_k(const std::vector<int>& ranked_grades, std::vector<int> judged_grades, std::size_t k = 10);

struct RetrievalEvaluation {
  double mean_ndcg = 0.0;
  std::map<std::string, double> per_query;
  // query id -> doc ids by descending cosine, ties by ascending doc id
  std::map<std::string, std::vector<std::string>> rankings;
};

RetrievalEvaluation evaluate_retrieval(const RetrievalCorpus& corpus, const EmbeddingGateway& gateway,
                                       std::size_t k = 10, unsigned threads = 1);

enum class ImpactCondition { Baseline, NormalToken, StickyToken };
std::string_view to_string(ImpactCondition c);

struct ImpactResult {
  ImpactCondition condition = ImpactCondition::Baseline;
  double ndcg = 0.0;
  std::vector<std::string> tokens_used;
  InsertionSide side = InsertionSide::End;
  std::map<std::string, double> per_query;
};

struct ImpactReport {
  ImpactResult baseline;
  ImpactResult normal;
  ImpactResult sticky;
  double normal_delta() const { return normal.ndcg - baseline.ndcg; }
  double sticky_delta() const { return sticky.ndcg - baseline.ndcg; }
};

struct ImpactOptions {
  InsertionSide side = InsertionSide::End;
  bool perturb_queries = false;
  std::size_t k = 10;
  unsigned threads = 1;
};

ImpactReport run_impact(const RetrievalCorpus& corpus, const std::vector<std::string>& sticky_tokens,
                        const std::vector<std::string>& normal_tokens, const EmbeddingGateway& gateway,
                        const ImpactOptions& options = {});

// `count` distinct Other-class valid tokens (non-blank surfaces, excluding
// `exclude`) chosen uniformly with a seeded partial shuffle; ascending id.
std::vector<TokenId> sample_normal_tokens(const ClassifiedVocabulary& vocab, std::size_t count, std::uint64_t seed,
                                          const std::vector<TokenId>& exclude = {});

nlohmann::json to_json(const ImpactReport& r);

}  // namespace sticky
