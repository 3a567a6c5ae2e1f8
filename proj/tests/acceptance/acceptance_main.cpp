// Acceptance checks. Prints one PASS/FAIL line per criterion; exits non-zero
// if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <nlohmann/json.hpp>

#include "sticky/geometry.h"
#include "sticky/impact.h"
#include "sticky/insertion.h"
#include "sticky/pipeline.h"
#include "sticky/scoring.h"
#include "sticky/synthetic_provider.h"
#include "sticky/toy.h"
#include "sticky/utf8.h"
#include "sticky/validation.h"

namespace {

using namespace sticky;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects the first failure message; later ones are counted.
class Checker {
 public:
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    if (failures_++ == 0) first_ = what;
  }
  void near(double got, double want, double tol, const std::string& what) {
    std::ostringstream s;
    s.precision(17);
    s << what << ": got " << got << ", want " << want << " (tol " << tol << ")";
    expect(std::abs(got - want) <= tol, s.str());
  }
  Outcome result(std::string ok_detail) const {
    if (failures_ == 0) return {true, std::move(ok_detail)};
    return {false, first_ + (failures_ > 1 ? " (+" + std::to_string(failures_ - 1) + " more)" : "")};
  }

 private:
  int failures_ = 0;
  std::string first_;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double x, int prec = 6) {
  std::ostringstream s;
  s.precision(prec);
  s << x;
  return s.str();
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::vector<double> unit(std::vector<double> v) {
  const double n = std::sqrt(dot(v, v));
  for (double& x : v) x /= n;
  return v;
}

// ---- alternate PRNG and insertion, written from the stream description ----

std::uint64_t alt_finalize(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t alt_seed(std::uint64_t master, const std::vector<std::uint64_t>& tags) {
  std::uint64_t h = alt_finalize(master);
  for (auto t : tags) h = alt_finalize(h ^ alt_finalize(t));
  return h;
}

struct AltRng {
  std::uint64_t s;
  explicit AltRng(std::uint64_t seed) : s(alt_finalize(seed) ? alt_finalize(seed) : 0x9E3779B97F4A7C15ULL) {}
  std::uint64_t next() {
    s ^= s >> 12;
    s ^= s << 25;
    s ^= s >> 27;
    return s * 0x2545F4914F6CDD1DULL;
  }
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t reject_under = (~bound + 1) % bound;
    std::uint64_t r;
    do r = next();
    while (r < reject_under);
    return r % bound;
  }
};

std::vector<std::string> ascii_words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> w;
  for (std::string x; in >> x;) w.push_back(x);
  return w;
}

std::string join_words(const std::vector<std::string>& w) {
  std::string out;
  for (const auto& x : w) out += (out.empty() ? "" : " ") + x;
  return out;
}

// Per-gap counters instead of a sorted gap list.
std::string alt_insert(InsertionKind kind, std::uint64_t seed, const std::string& s, const std::string& t,
                       std::size_t n) {
  if (n == 0) return s;
  auto words = ascii_words(s);
  if (kind == InsertionKind::Prefix) {
    words.insert(words.begin(), n, t);
    return join_words(words);
  }
  if (kind == InsertionKind::Suffix) {
    words.insert(words.end(), n, t);
    return join_words(words);
  }
  std::vector<std::size_t> per_gap(words.size() + 1, 0);
  AltRng rng(seed);
  for (std::size_t i = 0; i < n; ++i) ++per_gap[rng.below(words.size() + 1)];
  std::vector<std::string> out;
  for (std::size_t g = 0; g <= words.size(); ++g) {
    out.insert(out.end(), per_gap[g], t);
    if (g < words.size()) out.push_back(words[g]);
  }
  return join_words(out);
}

std::uint64_t alt_op_seed(InsertionKind kind, std::uint64_t master, std::uint64_t stage, TokenId token,
                          std::size_t pair) {
  return alt_seed(master, {stage, static_cast<std::uint64_t>(token), pair, static_cast<std::uint64_t>(kind)});
}

// ---- criteria ----

Outcome closed_form_statistics() {
  Checker c;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(20240601);
  double worst = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = 2 + rng() % 499;
    const std::size_t d = 2 + rng() % 63;
    std::normal_distribution<double> g;
    // a shared offset makes the cone narrow, as in real models
    const double shift = static_cast<double>(rng() % 4);
    std::vector<std::vector<double>> raw(n, std::vector<double>(d));
    for (auto& v : raw) {
      for (auto& x : v) x = g(rng);
      v[0] += shift;
      v = unit(v);
    }
    std::vector<EmbeddingVector> vecs;
    for (const auto& v : raw) vecs.push_back(EmbeddingVector::normalized(v));

    double sum = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        sum += dot(raw[i], raw[j]);
        ++pairs;
      }
    const double mean = sum / static_cast<double>(pairs);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) ss += (dot(raw[i], raw[j]) - mean) * (dot(raw[i], raw[j]) - mean);
    const double sigma = std::sqrt(ss / static_cast<double>(pairs));

    const auto got = mean_pairwise_similarity(vecs, StatsOptions{});
    const std::string tag = "vocab " + std::to_string(rep) + " (N=" + std::to_string(n) + ", d=" + std::to_string(d) + ")";
    c.expect(got.method == StatsMethod::Exact, tag + ": expected exact mode");
    c.near(got.u, mean, 1e-9, tag + " u");
    c.near(got.sigma, sigma, 1e-9, tag + " sigma");
    worst = std::max({worst, std::abs(got.u - mean), std::abs(got.sigma - sigma)});
  }
  const double elapsed = seconds_since(t0);
  c.expect(elapsed < 10.0, "runtime " + fmt(elapsed) + " s exceeds 10 s");
  return c.result("50 vocabularies, max |diff| " + fmt(worst, 3) + ", " + fmt(elapsed, 3) + " s");
}

Outcome shortlist_arithmetic() {
  Checker c;
  const std::vector<std::pair<std::size_t, std::size_t>> table{
      {23699, 474}, {32097, 642}, {49894, 998}, {147848, 2957}, {249976, 5000}};
  for (const auto& [valid, want] : table) {
    c.expect(shortlist_size(valid) == want, std::to_string(valid) + " -> " + std::to_string(shortlist_size(valid)) +
                                                ", want " + std::to_string(want));
    std::vector<StickyScoreBreakdown> scores(valid);
    for (std::size_t i = 0; i < valid; ++i) {
      scores[i].token_id = static_cast<TokenId>(i);
      scores[i].total = static_cast<double>((i * 7919) % valid);
    }
    const auto picked = shortlist(scores);
    c.expect(picked.size() == want, "shortlist() returned " + std::to_string(picked.size()) + " for " +
                                        std::to_string(valid));
  }
  return c.result("5/5 candidate counts exact");
}

Outcome sticky_score_formula() {
  Checker c;
  ScoreParams p;
  const std::vector<double> hand{0.4, -0.1};
  const auto s = aggregate_deltas(InsertionKind::Prefix, hand, 0.0, p);
  c.near(s.score, (0.4 + 0.5) / (0.1 + 0.5 + 1e-8), 1e-9, "hand example");

  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> d(1 + rng() % 10);
    for (auto& x : d) x = (rng() % 8 == 0) ? 0.0 : u(rng);
    const double penalty = std::max(0.0, u(rng));
    ScoreParams q;
    q.alpha = 0.5 + std::abs(u(rng));
    q.beta = 0.5 + std::abs(u(rng));

    double mp = 0, mm = 0, fp = 0, fm = 0;
    for (double x : d) {
      mp += std::max(x, 0.0);
      mm += std::max(-x, 0.0);
      fp += x > 0;
      fm += x < 0;
    }
    fp /= static_cast<double>(d.size());
    fm /= static_cast<double>(d.size());
    const double want = (mp + q.alpha * fp) / (mm + q.beta * fm + q.gamma + penalty);
    const auto got = aggregate_deltas(InsertionKind::Random, d, penalty, q);
    const std::string tag = "set " + std::to_string(rep);
    c.near(got.score, want, 1e-12 * std::max(1.0, want), tag + " score");
    c.expect(got.f_plus + got.f_minus <= 1.0, tag + ": F+ + F- > 1");

    const double scale = 0.05 + 4.0 * std::abs(u(rng));
    std::vector<double> scaled = d;
    for (auto& x : scaled) x *= scale;
    const auto sc = aggregate_deltas(InsertionKind::Random, scaled, penalty, q);
    c.near(sc.m_plus, scale * got.m_plus, 1e-12, tag + " scaled M+");
    c.near(sc.m_minus, scale * got.m_minus, 1e-12, tag + " scaled M-");
    c.expect(sc.f_plus == got.f_plus && sc.f_minus == got.f_minus, tag + ": scaling changed F");

    std::vector<double> shuffled = d;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto sh = aggregate_deltas(InsertionKind::Random, shuffled, penalty, q);
    c.near(sh.score, got.score, 1e-12 * std::max(1.0, got.score), tag + " order");
  }
  return c.result("hand example " + fmt(s.score, 12) + "; 100 random sets");
}

Outcome adaptive_threshold_check() {
  Checker c;
  const std::vector<double> g{0.1, 0.2, 0.3, 0.4};
  const auto t = adaptive_threshold(g);
  c.near(t.epsilon, 0.55, 1e-12, "epsilon");
  c.near(t.q1, 0.175, 1e-12, "q1");
  c.near(t.q3, 0.325, 1e-12, "q3");
  for (double v : {0.0, 0.123, 0.9}) {
    const std::vector<double> same(9, v);
    c.expect(adaptive_threshold(same).epsilon == v, "degenerate set " + fmt(v));
  }
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 0.6);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<ValidationResult> results(4 + rng() % 60);
    std::vector<double> gs;
    for (std::size_t i = 0; i < results.size(); ++i) {
      results[i].token_id = static_cast<TokenId>(rng() % 100000);
      results[i].g_value = u(rng);
      gs.push_back(results[i].g_value);
    }
    std::vector<double> eps(6);
    for (auto& e : eps) e = u(rng);
    eps.push_back(adaptive_threshold(gs).epsilon);
    std::sort(eps.begin(), eps.end());
    std::vector<TokenId> prev;
    for (double e : eps) {
      const auto omega = rederive_omega(results, e);
      std::multiset<TokenId> brute;
      for (const auto& r : results)
        if (r.g_value <= e) brute.insert(r.token_id);
      c.expect(std::equal(omega.begin(), omega.end(), brute.begin(), brute.end()),
               "set " + std::to_string(rep) + ": omega differs from direct filter");
      c.expect(std::includes(omega.begin(), omega.end(), prev.begin(), prev.end()),
               "set " + std::to_string(rep) + ": omega shrank as epsilon grew");
      prev = omega;
    }
  }
  return c.result("epsilon " + fmt(t.epsilon, 12) + "; monotone over 100 random sets");
}

// The sticky-token condition by brute force: u over all valid-token pairs, the filtered
// pairs, then every candidate against every filtered pair and operation.
Outcome end_to_end_oracle(const std::filesystem::path& work) {
  Checker c;
  const auto t0 = Clock::now();
  auto cfg = PipelineConfig::from_map({});
  cfg.out = (work / "detect").string();
  Session session(cfg);
  const DetectionReport report = detect(session);
  const double detect_seconds = seconds_since(t0);
  const auto stored = load_report((work / "detect" / "report.json").string());

  const auto& vocab = session.vocabulary();
  const ToyFixture toy = make_toy_fixture();
  c.expect(vocab.records.size() <= 2000 + 12, "toy vocabulary too large");
  c.expect(toy.planted_ids.size() == 3, "expected 3 planted ids");
  c.expect(toy.pairs.size() == 200, "expected 200 sentence pairs");

  std::unordered_map<std::string, TokenId> words;
  std::vector<std::string> surfaces;
  for (TokenId id : vocab.valid_ids) {
    const std::string w = utf8::trim(vocab.at(id).surface.value_or(""));
    if (w.empty()) continue;
    surfaces.push_back(w);
    if (ascii_words(w).size() == 1) words.emplace(w, id);
  }
  auto sc = cfg.synthetic_config();
  sc.sticky_ids = toy.planted_ids;
  const SyntheticProvider provider(sc, words);
  std::map<std::string, std::vector<double>> cache;
  auto embed = [&](const std::string& text) -> const std::vector<double>& {
    auto it = cache.find(text);
    if (it == cache.end()) it = cache.emplace(text, unit(provider.embed({text})[0])).first;
    return it->second;
  };

  std::vector<std::vector<double>> token_vecs;
  for (const auto& s : surfaces) token_vecs.push_back(unit(provider.embed({s})[0]));
  double sum = 0.0;
  std::size_t npairs = 0;
  for (std::size_t i = 0; i < token_vecs.size(); ++i)
    for (std::size_t j = i + 1; j < token_vecs.size(); ++j) {
      sum += dot(token_vecs[i], token_vecs[j]);
      ++npairs;
    }
  const double u = sum / static_cast<double>(npairs);
  c.near(report.anisotropy.stats.u, u, 1e-9, "u");

  std::vector<SentencePair> filtered;
  for (const auto& p : toy.pairs)
    if (dot(embed(p.s1), embed(p.s2)) < u) filtered.push_back(p);
  c.expect(filtered.size() == report.pairs.filtered,
           "filtered pairs " + std::to_string(report.pairs.filtered) + ", oracle " + std::to_string(filtered.size()));

  const double eps = stored.at("threshold").at("epsilon").get<double>();
  const auto shortlisted = stored.at("shortlist").at("ids").get<std::vector<TokenId>>();
  c.expect(shortlisted.size() == shortlist_size(vocab.valid_ids.size()), "shortlist size");
  std::vector<TokenId> omega;
  for (TokenId id : shortlisted) {
    const std::string surface = vocab.at(id).surface.value_or("");
    bool sticky = true;
    for (std::size_t j = 0; j < filtered.size() && sticky; ++j) {
      for (InsertionKind kind : kAllInsertionKinds) {
        const auto seed = alt_op_seed(kind, cfg.seed, kValidationStage, id, j);
        const double sim = dot(embed(filtered[j].s1), embed(alt_insert(kind, seed, filtered[j].s2, surface, cfg.n)));
        if (std::abs(sim - u) > eps) {
          sticky = false;
          break;
        }
      }
    }
    if (sticky) omega.push_back(id);
  }
  std::sort(omega.begin(), omega.end());
  const auto& got = report.validation.omega;
  c.expect(omega == got, "omega has " + std::to_string(got.size()) + " ids, oracle " + std::to_string(omega.size()));
  c.expect(report_omega(stored) == got, "report.json omega differs from the in-memory result");
  for (TokenId id : toy.planted_ids) {
    c.expect(std::binary_search(got.begin(), got.end(), id), "planted id " + std::to_string(id) + " not in omega");
  }
  c.expect(detect_seconds < 60.0, "detect took " + fmt(detect_seconds) + " s");
  return c.result("|C|=" + std::to_string(shortlisted.size()) + ", |Omega|=" + std::to_string(omega.size()) +
                  ", epsilon " + fmt(eps) + ", planted 3/3, detect " + fmt(detect_seconds, 3) + " s");
}

Outcome insertion_determinism() {
  Checker c;
  struct Frozen {
    std::string s, t;
    std::size_t n;
    std::uint64_t seed;
    std::string want;
  };
  // values from a separate scripted implementation of the same stream
  const std::vector<Frozen> frozen{
      {"a b c", "T", 2, 0, "T a T b c"},
      {"a b c", "T", 2, 1, "T a b c T"},
      {"a b c", "T", 2, 42, "a b T c T"},
      {"a b c", "T", 2, 2024, "a T T b c"},
      {"the quick brown fox jumps", "zz", 5, 7, "zz the quick brown zz fox zz zz jumps zz"},
  };
  for (const auto& f : frozen) {
    c.expect(insert(InsertionOp::random(f.seed), f.s, f.t, f.n) == f.want, "frozen seed " + std::to_string(f.seed));
    c.expect(alt_insert(InsertionKind::Random, f.seed, f.s, f.t, f.n) == f.want,
             "alternate frozen seed " + std::to_string(f.seed));
  }

  std::mt19937_64 rng(1000);
  const std::vector<std::string> lexicon{"the", "cat", "sat", "on", "a", "mat", "over", "lazy", "dog", "x",
                                         "émile", "naïve", "東京", "42", "well-known", "it's"};
  std::size_t mismatches = 0, identity_failures = 0;
  for (int i = 0; i < 1000; ++i) {
    std::string s;
    const std::size_t len = rng() % 25;
    for (std::size_t w = 0; w < len; ++w) s += (w ? " " : "") + lexicon[rng() % lexicon.size()];
    const std::string t = lexicon[rng() % lexicon.size()];
    const std::size_t n = 1 + rng() % 16;
    const std::uint64_t master = rng();
    for (InsertionKind kind : kAllInsertionKinds) {
      const InsertionOp op = stage_op(kind, master, kValidationStage, static_cast<TokenId>(i), i % 7);
      const std::string a = insert(op, s, t, n);
      const std::string b = insert(op, s, t, n);
      const std::string alt = alt_insert(kind, alt_op_seed(kind, master, kValidationStage, i, i % 7), s, t, n);
      if (a != b || a != alt) ++mismatches;
      if (insert(op, s, t, 0) != s) ++identity_failures;
    }
  }
  c.expect(mismatches == 0, std::to_string(mismatches) + " insertions differ from the alternate implementation");
  c.expect(identity_failures == 0, std::to_string(identity_failures) + " n=0 insertions changed the sentence");
  return c.result("5 frozen streams, 1000 cases x 3 ops byte-identical, n=0 identity");
}

double oracle_ndcg(const RetrievalCorpus& corpus, const std::function<std::vector<double>(const std::string&)>& embed,
                   std::map<std::string, double>* per_query) {
  std::map<std::string, std::vector<double>> docs;
  for (const auto& [id, text] : corpus.documents) docs[id] = embed(text);
  double total = 0.0;
  for (const auto& [qid, text] : corpus.queries) {
    const auto q = embed(text);
    std::vector<std::pair<double, std::string>> ranked;
    for (const auto& [did, v] : docs) ranked.emplace_back(-dot(q, v), did);
    std::sort(ranked.begin(), ranked.end());
    const auto& judged = corpus.qrels.at(qid);
    auto grade = [&](const std::string& did) {
      auto it = judged.find(did);
      return it == judged.end() ? 0 : it->second;
    };
    double dcg = 0.0;
    for (std::size_t r = 0; r < std::min<std::size_t>(10, ranked.size()); ++r) {
      dcg += grade(ranked[r].second) / std::log2(static_cast<double>(r) + 2.0);
    }
    std::vector<int> ideal;
    for (const auto& [d, gr] : judged) ideal.push_back(gr);
    std::sort(ideal.rbegin(), ideal.rend());
    double idcg = 0.0;
    for (std::size_t r = 0; r < std::min<std::size_t>(10, ideal.size()); ++r) {
      idcg += ideal[r] / std::log2(static_cast<double>(r) + 2.0);
    }
    const double v = idcg > 0 ? dcg / idcg : 0.0;
    (*per_query)[qid] = v;
    total += v;
  }
  return total / static_cast<double>(corpus.queries.size());
}

RetrievalCorpus oracle_perturb(const RetrievalCorpus& corpus, const std::vector<std::string>& tokens) {
  RetrievalCorpus out = corpus;
  std::size_t i = 0;
  for (auto& [id, text] : out.documents) {
    const std::size_t words = ascii_words(text).size();
    std::vector<std::string> w = ascii_words(text);
    w.insert(w.end(), (words + 9) / 10, tokens[i++ % tokens.size()]);
    text = join_words(w);
  }
  return out;
}

Outcome impact_direction(const std::filesystem::path& work) {
  Checker c;
  const ToyFixture toy = make_toy_fixture();
  auto cfg = PipelineConfig::from_map({});
  cfg.out = (work / "impact").string();
  cfg.impact_sticky_ids = toy.planted_ids;
  Session session(cfg);
  const auto j = impact_command(session);
  c.expect(toy.corpus.documents.size() == 50 && toy.corpus.queries.size() == 10, "corpus is not 50 docs / 10 queries");

  std::unordered_map<std::string, TokenId> words;
  const auto& vocab = session.vocabulary();
  for (TokenId id : vocab.valid_ids) {
    const std::string w = utf8::trim(vocab.at(id).surface.value_or(""));
    if (!w.empty() && ascii_words(w).size() == 1) words.emplace(w, id);
  }
  auto sc = cfg.synthetic_config();
  sc.sticky_ids = toy.planted_ids;
  const SyntheticProvider provider(sc, words);
  auto embed = [&](const std::string& t) { return unit(provider.embed({t})[0]); };

  std::map<std::string, double> pq;
  const double base = oracle_ndcg(toy.corpus, embed, &pq);
  const auto normal_tokens = j.at("normal_token").at("tokens_used").get<std::vector<std::string>>();
  const auto sticky_tokens = j.at("sticky_token").at("tokens_used").get<std::vector<std::string>>();
  std::vector<std::string> planted_surfaces;
  for (TokenId id : toy.planted_ids) planted_surfaces.push_back(vocab.at(id).surface.value_or(""));
  c.expect(sticky_tokens == planted_surfaces, "sticky condition did not use the planted tokens");
  const double normal = oracle_ndcg(oracle_perturb(toy.corpus, normal_tokens), embed, &pq);
  const double sticky = oracle_ndcg(oracle_perturb(toy.corpus, sticky_tokens), embed, &pq);

  c.near(j.at("baseline").at("ndcg").get<double>(), base, 1e-12, "baseline nDCG@10");
  c.near(j.at("normal_token").at("ndcg").get<double>(), normal, 1e-12, "normal nDCG@10");
  c.near(j.at("sticky_token").at("ndcg").get<double>(), sticky, 1e-12, "sticky nDCG@10");
  c.expect(sticky <= normal, "sticky nDCG@10 " + fmt(sticky) + " > normal " + fmt(normal));
  return c.result("baseline " + fmt(base, 4) + ", normal " + fmt(normal, 4) + ", sticky " + fmt(sticky, 4));
}

}  // namespace

int main() {
  const auto work = std::filesystem::temp_directory_path() / ("sticky_acceptance_" + std::to_string(::getpid()));
  std::filesystem::remove_all(work);
  std::filesystem::create_directories(work);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"closed-form statistics", closed_form_statistics},
      {"shortlist arithmetic", shortlist_arithmetic},
      {"sticky-score formula", sticky_score_formula},
      {"adaptive threshold", adaptive_threshold_check},
      {"end-to-end oracle equivalence", [&] { return end_to_end_oracle(work); }},
      {"insertion determinism", insertion_determinism},
      {"impact direction", [&] { return impact_direction(work); }},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::filesystem::remove_all(work);
  return failed == 0 ? 0 : 1;
}
