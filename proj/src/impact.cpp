#include "sticky/impact.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "sticky/error.h"
#include "sticky/parallel.h"
#include "sticky/rng.h"
#include "sticky/utf8.h"

namespace sticky {
namespace {

std::vector<nlohmann::json> read_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::vector<nlohmann::json> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (utf8::trim(line).empty()) continue;
    try {
      out.push_back(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

std::string field(const nlohmann::json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw DataError(where + ": missing \"" + key + "\"");
  const auto& v = j.at(key);
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw DataError(where + ": \"" + key + "\" must be a string");
}

std::string splice(const std::string& text, const std::string& token, std::size_t copies, InsertionSide side) {
  std::string block;
  for (std::size_t i = 0; i < copies; ++i) {
    if (i) block += ' ';
    block += token;
  }
  if (copies == 0) return text;
  const std::string body = utf8::trim(text);
  if (body.empty()) return block;
  return side == InsertionSide::Start ? block + " " + body : body + " " + block;
}

}  // namespace

void RetrievalCorpus::validate() const {
  if (documents.empty()) throw DataError("corpus has no documents");
  if (queries.empty()) throw DataError("corpus has no queries");
  for (const auto& [qid, docs] : qrels) {
    if (!queries.contains(qid)) throw DataError("qrels reference unknown query " + qid);
    for (const auto& [did, grade] : docs) {
      if (!documents.contains(did)) throw DataError("qrels reference unknown document " + did);
      if (grade < 0) throw DataError("negative relevance for " + qid + "/" + did);
    }
  }
  for (const auto& [qid, text] : queries) {
    auto it = qrels.find(qid);
    const bool any = it != qrels.end() &&
                     std::any_of(it->second.begin(), it->second.end(), [](const auto& p) { return p.second > 0; });
    if (!any) throw DataError("query " + qid + " has no relevant document");
  }
}

RetrievalCorpus load_corpus(const std::string& docs_path, const std::string& queries_path,
                            const std::string& qrels_path) {
  RetrievalCorpus c;
  for (const auto& j : read_jsonl(docs_path)) c.documents[field(j, "id", docs_path)] = field(j, "text", docs_path);
  for (const auto& j : read_jsonl(queries_path)) {
    c.queries[field(j, "id", queries_path)] = field(j, "text", queries_path);
  }
  for (const auto& j : read_jsonl(qrels_path)) {
    if (!j.contains("relevance") || !j.at("relevance").is_number_integer()) {
      throw DataError(qrels_path + ": \"relevance\" must be an integer");
    }
    c.qrels[field(j, "query_id", qrels_path)][field(j, "doc_id", qrels_path)] = j.at("relevance").get<int>();
  }
  c.validate();
  return c;
}

void write_corpus(const RetrievalCorpus& corpus, const std::string& docs_path, const std::string& queries_path,
                  const std::string& qrels_path) {
  std::ofstream docs(docs_path), queries(queries_path), qrels(qrels_path);
  if (!docs || !queries || !qrels) throw Error("cannot write corpus files");
  for (const auto& [id, text] : corpus.documents) docs << nlohmann::json{{"id", id}, {"text", text}}.dump() << '\n';
  for (const auto& [id, text] : corpus.queries) queries << nlohmann::json{{"id", id}, {"text", text}}.dump() << '\n';
  for (const auto& [qid, docs_map] : corpus.qrels) {
    for (const auto& [did, grade] : docs_map) {
      qrels << nlohmann::json{{"query_id", qid}, {"doc_id", did}, {"relevance", grade}}.dump() << '\n';
    }
  }
}

std::string_view to_string(InsertionSide side) { return side == InsertionSide::Start ? "start" : "end"; }

InsertionSide insertion_side_from_string(std::string_view s) {
  if (s == "start") return InsertionSide::Start;
  if (s == "end") return InsertionSide::End;
  throw ConfigError("unknown insertion side '" + std::string(s) + "' (expected start or end)");
}

std::size_t impact_copies(std::size_t words) { return (words + 9) / 10; }

RetrievalCorpus perturb_corpus(const RetrievalCorpus& corpus, const std::vector<std::string>& tokens,
                               InsertionSide side, bool perturb_queries) {
  if (tokens.empty()) throw Error("perturb_corpus needs at least one token");
  RetrievalCorpus out = corpus;
  std::size_t next = 0;
  for (auto& [id, text] : out.documents) {
    text = splice(text, tokens[next++ % tokens.size()], impact_copies(utf8::split_whitespace(text).size()), side);
  }
  if (perturb_queries) {
    for (auto& [id, text] : out.queries) {
      text = splice(text, tokens[next++ % tokens.size()], impact_copies(utf8::split_whitespace(text).size()), side);
    }
  }
  return out;
}

double ndcg_at_k(const std::vector<int>& ranked_grades, std::vector<int> judged_grades, std::size_t k) {
  auto dcg = [k](const std::vector<int>& grades) {
    double s = 0.0;
    for (std::size_t i = 0; i < std::min(k, grades.size()); ++i) {
      s += static_cast<double>(grades[i]) / std::log2(static_cast<double>(i) + 2.0);
    }
    return s;
  };
  std::sort(judged_grades.begin(), judged_grades.end(), std::greater<>());
  const double ideal = dcg(judged_grades);
  return ideal > 0.0 ? dcg(ranked_grades) / ideal : 0.0;
}

RetrievalEvaluation evaluate_retrieval(const RetrievalCorpus& corpus, const EmbeddingGateway& gateway, std::size_t k,
                                       unsigned threads) {
  corpus.validate();
  std::vector<std::string> doc_ids, doc_texts;
  for (const auto& [id, text] : corpus.documents) {
    doc_ids.push_back(id);
    doc_texts.push_back(text);
  }
  const auto doc_vecs = gateway.embed_batch(doc_texts);
  std::vector<std::string> query_ids;
  for (const auto& [id, text] : corpus.queries) query_ids.push_back(id);

  std::vector<std::vector<std::string>> rankings(query_ids.size());
  std::vector<double> scores(query_ids.size());
  parallel_for(query_ids.size(), threads, [&](std::size_t qi) {
    const auto q = gateway.embed(corpus.queries.at(query_ids[qi]));
    std::vector<std::pair<double, std::size_t>> sims;
    for (std::size_t d = 0; d < doc_vecs.size(); ++d) sims.emplace_back(cosine(q, doc_vecs[d]), d);
    // doc_ids are already sorted, so index order is id order for ties
    std::sort(sims.begin(), sims.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    const auto& judged = corpus.qrels.at(query_ids[qi]);
    std::vector<int> ranked, all;
    for (const auto& [sim, d] : sims) {
      rankings[qi].push_back(doc_ids[d]);
      auto it = judged.find(doc_ids[d]);
      ranked.push_back(it == judged.end() ? 0 : it->second);
    }
    for (const auto& [did, grade] : judged) all.push_back(grade);
    scores[qi] = ndcg_at_k(ranked, all, k);
  });

  RetrievalEvaluation out;
  double sum = 0.0;
  for (std::size_t qi = 0; qi < query_ids.size(); ++qi) {
    out.per_query[query_ids[qi]] = scores[qi];
    out.rankings[query_ids[qi]] = std::move(rankings[qi]);
    sum += scores[qi];
  }
  out.mean_ndcg = sum / static_cast<double>(query_ids.size());
  return out;
}

std::string_view to_string(ImpactCondition c) {
  switch (c) {
    case ImpactCondition::Baseline: return "baseline";
    case ImpactCondition::NormalToken: return "normal_token";
    case ImpactCondition::StickyToken: return "sticky_token";
  }
  return "baseline";
}

ImpactReport run_impact(const RetrievalCorpus& corpus, const std::vector<std::string>& sticky_tokens,
                        const std::vector<std::string>& normal_tokens, const EmbeddingGateway& gateway,
                        const ImpactOptions& options) {
  if (sticky_tokens.empty()) throw InsufficientDataError("impact needs at least one sticky token");
  if (normal_tokens.empty()) throw InsufficientDataError("impact needs at least one normal token");
  auto run = [&](ImpactCondition c, const std::vector<std::string>& tokens) {
    ImpactResult r;
    r.condition = c;
    r.side = options.side;
    r.tokens_used = tokens;
    const RetrievalCorpus used =
        tokens.empty() ? corpus : perturb_corpus(corpus, tokens, options.side, options.perturb_queries);
    auto eval = evaluate_retrieval(used, gateway, options.k, options.threads);
    r.ndcg = eval.mean_ndcg;
    r.per_query = std::move(eval.per_query);
    return r;
  };
  ImpactReport report;
  report.baseline = run(ImpactCondition::Baseline, {});
  report.normal = run(ImpactCondition::NormalToken, normal_tokens);
  report.sticky = run(ImpactCondition::StickyToken, sticky_tokens);
  return report;
}

std::vector<TokenId> sample_normal_tokens(const ClassifiedVocabulary& vocab, std::size_t count, std::uint64_t seed,
                                          const std::vector<TokenId>& exclude) {
  const std::set<TokenId> skip(exclude.begin(), exclude.end());
  std::vector<TokenId> pool;
  for (TokenId id : vocab.valid_ids) {
    const auto& r = vocab.at(id);
    if (r.cls == TokenClass::Other && !skip.contains(id) && !utf8::trim(r.surface.value_or("")).empty()) {
      pool.push_back(id);
    }
  }
  if (pool.empty()) throw InsufficientDataError("no ordinary tokens available for the control condition");
  const std::size_t m = std::min(count, pool.size());
  XorShift64Star rng(seed);
  for (std::size_t i = 0; i < m; ++i) {
    std::swap(pool[i], pool[i + static_cast<std::size_t>(rng.below(pool.size() - i))]);
  }
  pool.resize(m);
  std::sort(pool.begin(), pool.end());
  return pool;
}

nlohmann::json to_json(const ImpactReport& r) {
  auto one = [](const ImpactResult& x) {
    return nlohmann::json{{"condition", to_string(x.condition)},
                          {"ndcg", x.ndcg},
                          {"tokens_used", x.tokens_used},
                          {"insertion_side", to_string(x.side)},
                          {"per_query", x.per_query}};
  };
  return {{"baseline", one(r.baseline)},
          {"normal_token", one(r.normal)},
          {"sticky_token", one(r.sticky)},
          {"normal_delta", r.normal_delta()},
          {"sticky_delta", r.sticky_delta()}};
}

}  // namespace sticky
