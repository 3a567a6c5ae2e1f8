#include "sticky/pipeline.h"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <type_traits>

#include "sticky/error.h"
#include "sticky/insertion.h"
#include "sticky/parallel.h"
#include "sticky/rng.h"
#include "sticky/synthetic_provider.h"
#include "sticky/utf8.h"

namespace sticky {
namespace fs = std::filesystem;

namespace {

template <typename Fn>
auto run_stage(Session& session, const std::string& name, std::map<std::string, double>& timing, Fn&& fn)
    -> decltype(fn()) {
  const auto t0 = std::chrono::steady_clock::now();
  auto record = [&] {
    timing[name] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };
  try {
    if constexpr (std::is_void_v<decltype(fn())>) {
      fn();
      record();
    } else {
      decltype(auto) r = fn();
      record();
      return r;
    }
  } catch (const StageFailure&) {
    throw;
  } catch (const std::exception& e) {
    session.artifacts().write_failure_manifest(name, e.what());
    throw StageFailure(name, std::current_exception(), e.what());
  }
}

nlohmann::json census_json(const VocabularyCensus& c) {
  return {{"vocab_size", c.vocab_size}, {"undecodable", c.undecodable}, {"unreachable", c.unreachable},
          {"special", c.special},       {"other", c.other},             {"valid", c.valid}};
}

std::vector<Candidate> to_candidates(const std::vector<TokenId>& ids, const ClassifiedVocabulary& vocab) {
  std::vector<Candidate> out;
  for (TokenId id : ids) out.push_back({id, vocab.at(id).surface.value_or("")});
  return out;
}

ScoreParams score_params(const PipelineConfig& c) {
  ScoreParams p;
  p.alpha = c.alpha;
  p.beta = c.beta;
  p.gamma = c.gamma;
  p.n = c.n;
  p.k = c.k;
  p.master_seed = c.seed;
  return p;
}

struct Filtered {
  AnisotropyReport anisotropy;
  FilterSummary summary;
  std::vector<SentencePair> pairs;
};

Filtered stats_and_filter(Session& session, std::map<std::string, double>& timing) {
  Filtered f;
  const auto& vocab = run_stage(session, "classify", timing, [&]() -> const ClassifiedVocabulary& {
    const auto& v = session.vocabulary();
    session.artifacts().write("vocab.jsonl", [&](std::ostream& out) { write_records_jsonl(out, v.records); });
    return v;
  });
  f.anisotropy = run_stage(session, "stats", timing, [&] {
    auto a = anisotropy_report(vocab, session.gateway(), session.config().stats_options());
    session.artifacts().write("histogram.csv", [&](std::ostream& out) { write_histogram_csv(out, a.histogram); });
    return a;
  });
  run_stage(session, "filter", timing, [&] {
    auto loaded = session.pairs();
    f.summary.loaded = loaded.pairs.size();
    f.summary.duplicates = loaded.duplicates;
    f.summary.rejected_too_long = loaded.rejected_too_long;
    auto result = filter_pairs(loaded.pairs, f.anisotropy.stats, session.gateway(), session.config().pair_cap);
    f.summary.evaluated = result.evaluated;
    f.summary.filtered = result.filtered.size();
    f.summary.warning = result.warning;
    f.pairs = std::move(result.filtered);
    session.artifacts().write("filtered_pairs.jsonl", [&](std::ostream& out) { write_pairs_jsonl(out, f.pairs); });
    if (f.pairs.empty()) {
      throw InsufficientDataError("no sentence pair has baseline similarity below u = " +
                                  std::to_string(f.anisotropy.stats.u));
    }
  });
  return f;
}

std::vector<TokenId> omega_from_report_file(const Session& session) {
  const auto path = session.config().out + "/report.json";
  if (!fs::exists(path)) return {};
  return report_omega(load_report(path));
}

std::vector<TokenId> check_ids(const std::vector<TokenId>& ids, const ClassifiedVocabulary& vocab,
                               const std::string& what) {
  std::set<TokenId> valid(vocab.valid_ids.begin(), vocab.valid_ids.end());
  for (TokenId id : ids) {
    if (!valid.contains(id)) throw ConfigError(what + ": token " + std::to_string(id) + " is not a valid token");
  }
  return ids;
}

}  // namespace

// ---- ArtifactDir

ArtifactDir::ArtifactDir(fs::path root) : root_(std::move(root)) {}

void ArtifactDir::commit(const std::string& name, const std::string& contents) {
  fs::create_directories(root_);
  const fs::path target = root_ / name;
  const fs::path tmp = root_ / (name + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("cannot write " + tmp.string());
    out << contents;
    if (!out) throw Error("short write to " + tmp.string());
  }
  fs::rename(tmp, target);
  if (std::find(written_.begin(), written_.end(), name) == written_.end()) written_.push_back(name);
}

void ArtifactDir::write_failure_manifest(const std::string& stage, const std::string& message) {
  nlohmann::json m{{"failed_stage", stage}, {"error", message}, {"artifacts", written_}};
  try {
    fs::create_directories(root_);
    std::ofstream(root_ / "manifest.json") << m.dump(2) << '\n';
  } catch (const std::exception&) {
    // best effort; the original error matters more
  }
}

// ---- Session

Session::Session(PipelineConfig config) : config_(std::move(config)), artifacts_(config_.out) { config_.check(); }

unsigned Session::threads() const { return config_.threads == 0 ? default_threads() : config_.threads; }

const ToyFixture& Session::toy() {
  if (!toy_) toy_ = make_toy_fixture();
  return *toy_;
}

const TokenizerHandle& Session::tokenizer() {
  if (!tokenizer_) {
    if (uses_toy()) {
      if (!toy_paths_) toy_paths_ = write_toy_fixture(toy(), (fs::path(config_.out) / "toy").string());
      tokenizer_ = TokenizerHandle::open(toy_paths_->tokenizer);
    } else {
      tokenizer_ = TokenizerHandle::open(config_.tokenizer);
    }
  }
  return *tokenizer_;
}

const ClassifiedVocabulary& Session::vocabulary() {
  if (!vocab_) vocab_ = classify_vocabulary(tokenizer(), threads());
  return *vocab_;
}

std::vector<TokenId> Session::planted_ids() {
  if (config_.provider != "synthetic") return {};
  if (!config_.synthetic_sticky_ids.empty()) return config_.synthetic_sticky_ids;
  if (uses_toy()) return toy().planted_ids;
  return {};
}

const EmbeddingGateway& Session::gateway() {
  if (!gateway_) {
    std::shared_ptr<const EmbeddingProvider> provider;
    if (config_.provider == "synthetic") {
      // Words the synthetic provider recognizes: trimmed single-word surfaces of valid tokens.
      std::unordered_map<std::string, TokenId> words;
      const auto& vocab = vocabulary();
      for (TokenId id : vocab.valid_ids) {
        const std::string w = utf8::trim(vocab.at(id).surface.value_or(""));
        if (w.empty() || utf8::split_whitespace(w).size() != 1) continue;
        words.emplace(w, id);
      }
      auto sc = config_.synthetic_config();
      sc.sticky_ids = planted_ids();
      provider = std::make_shared<SyntheticProvider>(sc, std::move(words));
    } else if (config_.provider.starts_with("http://") || config_.provider.starts_with("https://")) {
      provider = std::make_shared<RemoteProvider>(config_.provider, config_.retry);
    } else {
      throw ConfigError("provider must be 'synthetic' or an http(s) URL, got '" + config_.provider + "'");
    }
    GatewayOptions opts;
    opts.batch_size = config_.batch_size;
    opts.retry = config_.retry;
    gateway_ = std::make_unique<EmbeddingGateway>(std::move(provider), opts);
  }
  return *gateway_;
}

LoadedPairs Session::pairs() {
  PairLoadOptions opts;
  opts.max_words = config_.max_words;
  if (config_.pairs.empty()) {
    if (!uses_toy()) throw ConfigError("pairs is required with a non-toy tokenizer");
    LoadedPairs lp;
    for (const auto& p : toy().pairs) {
      if (utf8::split_whitespace(p.s1).size() > opts.max_words || utf8::split_whitespace(p.s2).size() > opts.max_words) {
        ++lp.rejected_too_long;
        continue;
      }
      lp.pairs.push_back(p);
    }
    lp.lines = toy().pairs.size();
    return lp;
  }
  LoadedPairs all;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& path : config_.pairs) {
    const PairFormat fmt =
        config_.pairs_format == "auto" ? pair_format_for_path(path) : pair_format_from_string(config_.pairs_format);
    auto lp = load_pairs(path, fmt, opts);
    all.lines += lp.lines;
    all.duplicates += lp.duplicates;
    all.rejected_too_long += lp.rejected_too_long;
    for (auto& p : lp.pairs) {
      if (seen.emplace(p.s1, p.s2).second) {
        all.pairs.push_back(std::move(p));
      } else {
        ++all.duplicates;
      }
    }
  }
  return all;
}

RetrievalCorpus Session::corpus() {
  if (config_.corpus_docs.empty()) {
    if (!uses_toy()) throw ConfigError("corpus.docs, corpus.queries and corpus.qrels are required");
    return toy().corpus;
  }
  if (config_.corpus_queries.empty() || config_.corpus_qrels.empty()) {
    throw ConfigError("corpus.docs, corpus.queries and corpus.qrels must be set together");
  }
  return load_corpus(config_.corpus_docs, config_.corpus_queries, config_.corpus_qrels);
}

// ---- detection

DetectionReport detect(Session& session) {
  DetectionReport r;
  const auto& cfg = session.config();
  auto f = stats_and_filter(session, r.timing_seconds);
  const auto& vocab = session.vocabulary();
  r.provider = session.gateway().info();
  r.census = vocab.census();
  r.anisotropy = std::move(f.anisotropy);
  r.pairs = f.summary;
  r.planted_ids = session.planted_ids();

  r.scores = run_stage(session, "score", r.timing_seconds, [&] {
    auto s = score_vocabulary(vocab, f.pairs, session.gateway(), score_params(cfg), session.threads());
    session.artifacts().write("scores.csv", [&](std::ostream& out) { write_scores_csv(out, s, vocab); });
    return s;
  });
  r.candidates = run_stage(session, "shortlist", r.timing_seconds, [&] {
    return to_candidates(shortlist(r.scores, cfg.shortlist_fraction), vocab);
  });
  r.validation = run_stage(session, "validate", r.timing_seconds, [&] {
    auto v = validate(r.candidates, f.pairs, r.anisotropy.stats.u, session.gateway(), cfg.validation_params(),
                      session.threads());
    session.artifacts().write("validation.csv",
                              [&](std::ostream& out) { write_validation_csv(out, v.results, r.candidates); });
    return v;
  });
  run_stage(session, "report", r.timing_seconds, [&] {
    const auto j = report_json(r, session);
    session.artifacts().write("report.json", [&](std::ostream& out) { out << j.dump(2) << '\n'; });
  });
  return r;
}

nlohmann::json report_body(const DetectionReport& r, const Session& session) {
  const auto& cfg = session.config();
  nlohmann::json omega = nlohmann::json::array();
  nlohmann::json results = nlohmann::json::array();
  std::map<TokenId, const ValidationResult*> by_id;
  for (std::size_t i = 0; i < r.validation.results.size(); ++i) {
    const auto& v = r.validation.results[i];
    by_id[v.token_id] = &v;
    results.push_back({{"token_id", v.token_id},
                       {"surface", r.candidates[i].surface},
                       {"G", v.g_value},
                       {"passed", v.passed},
                       {"evaluations", v.evaluations},
                       {"early_exit", v.early_exit}});
  }
  std::map<TokenId, std::string> surfaces;
  for (const auto& c : r.candidates) surfaces[c.id] = c.surface;
  for (TokenId id : r.validation.omega) {
    omega.push_back({{"token_id", id}, {"surface", surfaces.at(id)}, {"G", by_id.at(id)->g_value}});
  }
  nlohmann::json shortlist_ids = nlohmann::json::array();
  for (const auto& c : r.candidates) shortlist_ids.push_back(c.id);

  nlohmann::json stats = to_json(r.anisotropy.stats);
  stats["embedded_tokens"] = r.anisotropy.embedded_ids.size();
  stats["skipped_blank"] = r.anisotropy.skipped_blank;

  nlohmann::json pairs{{"loaded", r.pairs.loaded},
                       {"duplicates", r.pairs.duplicates},
                       {"rejected_too_long", r.pairs.rejected_too_long},
                       {"evaluated", r.pairs.evaluated},
                       {"filtered", r.pairs.filtered}};
  if (r.pairs.warning) pairs["warning"] = *r.pairs.warning;

  nlohmann::json seeds{{"master", cfg.seed}};
  if (r.anisotropy.stats.sample_seed) seeds["stats_sample"] = *r.anisotropy.stats.sample_seed;

  nlohmann::json body{
      {"schema_version", kReportSchemaVersion},
      {"provider", to_json(r.provider)},
      {"tokenizer", cfg.tokenizer},
      {"stats", stats},
      {"census", census_json(r.census)},
      {"pairs", pairs},
      {"shortlist", {{"size", r.candidates.size()}, {"fraction", cfg.shortlist_fraction}, {"ids", shortlist_ids}}},
      {"threshold", r.validation.threshold ? to_json(*r.validation.threshold) : nlohmann::json(nullptr)},
      {"threshold_note", std::string(kUpperFenceNote)},
      {"g_reduction", std::string(to_string(cfg.g_reduction))},
      {"omega", omega},
      {"validation", results},
      {"config", cfg.canonical()},
      {"config_digest", cfg.digest()},
      {"seeds", seeds},
  };
  if (!r.planted_ids.empty()) body["planted_ids"] = r.planted_ids;
  return body;
}

nlohmann::json report_json(const DetectionReport& r, const Session& session) {
  auto j = report_body(r, session);
  j["timing_seconds"] = r.timing_seconds;
  return j;
}

nlohmann::json load_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read report " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
  if (j.value("schema_version", 0) != kReportSchemaVersion) {
    throw DataError(path + ": unsupported report schema version");
  }
  return j;
}

std::vector<TokenId> rederive_omega(const nlohmann::json& report) {
  if (report.at("threshold").is_null()) return {};
  const double eps = report.at("threshold").at("epsilon").get<double>();
  std::vector<ValidationResult> results;
  for (const auto& v : report.at("validation")) {
    ValidationResult r;
    r.token_id = v.at("token_id").get<TokenId>();
    r.g_value = v.at("G").get<double>();
    results.push_back(r);
  }
  return rederive_omega(results, eps);
}

std::vector<TokenId> report_omega(const nlohmann::json& report) {
  std::vector<TokenId> out;
  for (const auto& o : report.at("omega")) out.push_back(o.at("token_id").get<TokenId>());
  return out;
}

int exit_code_for(std::exception_ptr e) {
  try {
    std::rethrow_exception(e);
  } catch (const StageFailure& f) {
    return exit_code_for(f.cause());
  } catch (const ConfigError&) {
    return 2;
  } catch (const DataError&) {
    return 2;
  } catch (const TransportError&) {
    return 3;
  } catch (const InsufficientDataError&) {
    return 4;
  } catch (...) {
    return 1;
  }
}

// ---- subcommands

nlohmann::json classify_command(Session& session) {
  std::map<std::string, double> timing;
  const auto& vocab = run_stage(session, "classify", timing, [&]() -> const ClassifiedVocabulary& {
    const auto& v = session.vocabulary();
    session.artifacts().write("vocab.jsonl", [&](std::ostream& out) { write_records_jsonl(out, v.records); });
    return v;
  });
  return {{"census", census_json(vocab.census())},
          {"adds_leading_space", session.tokenizer().adds_leading_space()},
          {"artifact", "vocab.jsonl"}};
}

nlohmann::json stats_command(Session& session) {
  std::map<std::string, double> timing;
  const auto& vocab = run_stage(session, "classify", timing, [&]() -> const ClassifiedVocabulary& {
    return session.vocabulary();
  });
  auto a = run_stage(session, "stats", timing, [&] {
    auto rep = anisotropy_report(vocab, session.gateway(), session.config().stats_options());
    session.artifacts().write("histogram.csv", [&](std::ostream& out) { write_histogram_csv(out, rep.histogram); });
    return rep;
  });
  auto j = to_json(a.stats);
  j["embedded_tokens"] = a.embedded_ids.size();
  j["skipped_blank"] = a.skipped_blank;
  session.artifacts().write("stats.json", [&](std::ostream& out) { out << j.dump(2) << '\n'; });
  return j;
}

nlohmann::json score_command(Session& session) {
  std::map<std::string, double> timing;
  const auto& cfg = session.config();
  auto f = stats_and_filter(session, timing);
  const auto& vocab = session.vocabulary();
  auto scores = run_stage(session, "score", timing, [&] {
    auto s = score_vocabulary(vocab, f.pairs, session.gateway(), score_params(cfg), session.threads());
    session.artifacts().write("scores.csv", [&](std::ostream& out) { write_scores_csv(out, s, vocab); });
    return s;
  });
  const auto candidates = to_candidates(shortlist(scores, cfg.shortlist_fraction), vocab);
  nlohmann::json c = nlohmann::json::array();
  for (const auto& x : candidates) c.push_back({{"token_id", x.id}, {"surface", x.surface}});
  nlohmann::json j{{"u", f.anisotropy.stats.u},
                   {"valid_tokens", vocab.valid_ids.size()},
                   {"filtered_pairs", f.pairs.size()},
                   {"shortlist_size", candidates.size()},
                   {"candidates", c},
                   {"config_digest", cfg.digest()}};
  session.artifacts().write("shortlist.json", [&](std::ostream& out) { out << j.dump(2) << '\n'; });
  return j;
}

nlohmann::json validate_command(Session& session) {
  const auto& cfg = session.config();
  const auto shortlist_path = fs::path(cfg.out) / "shortlist.json";
  const auto pairs_path = fs::path(cfg.out) / "filtered_pairs.jsonl";
  if (!fs::exists(shortlist_path) || !fs::exists(pairs_path)) {
    throw ConfigError("validate needs shortlist.json and filtered_pairs.jsonl in " + cfg.out + "; run score first");
  }
  nlohmann::json sl;
  {
    std::ifstream in(shortlist_path);
    try {
      in >> sl;
    } catch (const nlohmann::json::exception& e) {
      throw DataError(shortlist_path.string() + ": " + e.what());
    }
  }
  std::vector<Candidate> candidates;
  for (const auto& c : sl.at("candidates")) {
    candidates.push_back({c.at("token_id").get<TokenId>(), c.at("surface").get<std::string>()});
  }
  PairLoadOptions opts;
  opts.max_words = std::numeric_limits<std::size_t>::max();
  auto pairs = load_pairs(pairs_path.string(), PairFormat::Jsonl, opts).pairs;
  std::map<std::string, double> timing;
  auto v = run_stage(session, "validate", timing, [&] {
    auto out = validate(candidates, pairs, sl.at("u").get<double>(), session.gateway(), cfg.validation_params(),
                        session.threads());
    session.artifacts().write("validation.csv",
                              [&](std::ostream& o) { write_validation_csv(o, out.results, candidates); });
    return out;
  });
  nlohmann::json j{{"candidates", candidates.size()},
                   {"omega", v.omega},
                   {"threshold", v.threshold ? to_json(*v.threshold) : nlohmann::json(nullptr)},
                   {"threshold_note", std::string(kUpperFenceNote)}};
  session.artifacts().write("validation.json", [&](std::ostream& out) { out << j.dump(2) << '\n'; });
  return j;
}

nlohmann::json detect_command(Session& session) {
  const auto r = detect(session);
  nlohmann::json omega = nlohmann::json::array();
  for (TokenId id : r.validation.omega) {
    omega.push_back({{"token_id", id}, {"surface", session.vocabulary().at(id).surface.value_or("")}});
  }
  return {{"u", r.anisotropy.stats.u},
          {"sigma", r.anisotropy.stats.sigma},
          {"valid_tokens", r.census.valid},
          {"filtered_pairs", r.pairs.filtered},
          {"shortlist_size", r.candidates.size()},
          {"epsilon", r.validation.threshold ? nlohmann::json(r.validation.threshold->epsilon) : nlohmann::json(nullptr)},
          {"omega", omega},
          {"report", (fs::path(session.config().out) / "report.json").string()}};
}

nlohmann::json sweep_command(Session& session) {
  const auto& cfg = session.config();
  const auto& vocab = session.vocabulary();
  std::vector<TokenId> tokens = cfg.sweep_tokens;
  if (tokens.empty()) tokens = omega_from_report_file(session);
  if (tokens.empty()) tokens = session.planted_ids();
  if (tokens.empty()) throw ConfigError("sweep needs sweep.tokens, a report.json with validated tokens, or planted ids");
  check_ids(tokens, vocab, "sweep.tokens");

  auto loaded = session.pairs();
  const std::size_t np = std::min(cfg.sweep_pairs, loaded.pairs.size());
  if (np == 0) throw InsufficientDataError("sweep needs at least one sentence pair");

  std::ostringstream detail;
  detail << "token_id,pair_index,op,n,similarity\n" << std::setprecision(12);
  nlohmann::json files = nlohmann::json::array();
  for (TokenId id : tokens) {
    const std::string surface = vocab.at(id).surface.value_or("");
    std::vector<double> mean(cfg.sweep_n_max + 1, 0.0);
    for (std::size_t p = 0; p < np; ++p) {
      for (InsertionKind kind : kAllInsertionKinds) {
        const auto op = stage_op(kind, cfg.seed, kSweepStage, id, p);
        const auto pts = sweep(loaded.pairs[p], surface, op, cfg.sweep_n_max, session.gateway());
        for (const auto& pt : pts) {
          mean[pt.n] += pt.similarity / static_cast<double>(np * kAllInsertionKinds.size());
          detail << id << ',' << p << ',' << to_string(kind) << ',' << pt.n << ',' << pt.similarity << '\n';
        }
      }
    }
    std::vector<SweepPoint> curve;
    for (std::size_t n = 0; n < mean.size(); ++n) curve.push_back({n, mean[n]});
    const std::string name = "sweep_" + std::to_string(id) + ".csv";
    session.artifacts().write(name, [&](std::ostream& out) { write_sweep_csv(out, curve); });
    files.push_back(name);
  }
  session.artifacts().write("sweep_detail.csv", [&](std::ostream& out) { out << detail.str(); });
  return {{"tokens", tokens}, {"pairs", np}, {"n_max", cfg.sweep_n_max}, {"files", files}};
}

nlohmann::json impact_command(Session& session) {
  const auto& cfg = session.config();
  const auto& vocab = session.vocabulary();
  std::vector<TokenId> sticky_ids = cfg.impact_sticky_ids;
  if (sticky_ids.empty()) sticky_ids = omega_from_report_file(session);
  if (sticky_ids.empty()) {
    throw ConfigError("impact needs impact.sticky_ids or a report.json with validated tokens in " + cfg.out);
  }
  check_ids(sticky_ids, vocab, "impact.sticky_ids");
  const std::size_t count = cfg.impact_normal_count == 0 ? sticky_ids.size() : cfg.impact_normal_count;
  const auto normal_ids = sample_normal_tokens(vocab, count, derive_seed(cfg.seed, {0x696D70616374}), sticky_ids);

  auto surfaces = [&](const std::vector<TokenId>& ids) {
    std::vector<std::string> out;
    for (TokenId id : ids) out.push_back(vocab.at(id).surface.value_or(""));
    return out;
  };
  ImpactOptions opts;
  opts.side = cfg.impact_side;
  opts.perturb_queries = cfg.impact_perturb_queries;
  opts.threads = session.threads();
  std::map<std::string, double> timing;
  const auto report = run_stage(session, "impact", timing, [&] {
    return run_impact(session.corpus(), surfaces(sticky_ids), surfaces(normal_ids), session.gateway(), opts);
  });
  auto j = to_json(report);
  j["sticky_ids"] = sticky_ids;
  j["normal_ids"] = normal_ids;
  session.artifacts().write("impact.json", [&](std::ostream& out) { out << j.dump(2) << '\n'; });
  return j;
}

}  // namespace sticky
