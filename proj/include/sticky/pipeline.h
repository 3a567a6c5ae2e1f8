#pragma once

#include <chrono>
#include <exception>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sticky/config.h"
#include "sticky/corpus.h"
#include "sticky/embedding.h"
#include "sticky/error.h"
#include "sticky/geometry.h"
#include "sticky/impact.h"
#include "sticky/scoring.h"
#include "sticky/tokenizer.h"
#include "sticky/toy.h"
#include "sticky/validation.h"

namespace sticky {

inline constexpr int kReportSchemaVersion = 1;

// A stage threw; `cause` is the original exception.
class StageFailure : public Error {
 public:
  StageFailure(std::string stage, std::exception_ptr cause, const std::string& message)
      : Error("stage " + stage + " failed: " + message), stage_(std::move(stage)), cause_(std::move(cause)) {}
  const std::string& stage() const { return stage_; }
  std::exception_ptr cause() const { return cause_; }

 private:
  std::string stage_;
  std::exception_ptr cause_;
};

// Output directory that remembers what it wrote.
class ArtifactDir {
 public:
  explicit ArtifactDir(std::filesystem::path root);
  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path path(const std::string& name) const { return root_ / name; }
  // Writes via `fn(stream)` to a temporary file, then renames into place.
  template <typename Fn>
  void write(const std::string& name, Fn&& fn);
  const std::vector<std::string>& written() const { return written_; }
  // Writes manifest.json naming the failed stage and the finished artifacts.
  void write_failure_manifest(const std::string& stage, const std::string& message);

 private:
  void commit(const std::string& name, const std::string& contents);
  std::filesystem::path root_;
  std::vector<std::string> written_;
};

template <typename Fn>
void ArtifactDir::write(const std::string& name, Fn&& fn) {
  std::ostringstream out;
  fn(out);
  commit(name, out.str());
}

// Lazily opened resources shared by every subcommand.
class Session {
 public:
  explicit Session(PipelineConfig config);

  const PipelineConfig& config() const { return config_; }
  unsigned threads() const;
  ArtifactDir& artifacts() { return artifacts_; }

  bool uses_toy() const { return config_.tokenizer == "toy"; }
  const ToyFixture& toy();
  const TokenizerHandle& tokenizer();
  const ClassifiedVocabulary& vocabulary();
  const EmbeddingGateway& gateway();
  // Synthetic planted ids in effect (configured, else the toy's); empty for remote providers.
  std::vector<TokenId> planted_ids();

  LoadedPairs pairs();
  RetrievalCorpus corpus();

 private:
  PipelineConfig config_;
  ArtifactDir artifacts_;
  std::optional<ToyFixture> toy_;
  std::optional<ToyPaths> toy_paths_;
  std::optional<TokenizerHandle> tokenizer_;
  std::optional<ClassifiedVocabulary> vocab_;
  std::unique_ptr<EmbeddingGateway> gateway_;
};

struct FilterSummary {
  std::size_t loaded = 0;
  std::size_t duplicates = 0;
  std::size_t rejected_too_long = 0;
  std::size_t evaluated = 0;
  std::size_t filtered = 0;
  std::optional<std::string> warning;
};

struct DetectionReport {
  ProviderInfo provider;
  AnisotropyReport anisotropy;
  VocabularyCensus census;
  FilterSummary pairs;
  std::vector<StickyScoreBreakdown> scores;
  std::vector<Candidate> candidates;
  ValidationOutcome validation;
  std::vector<TokenId> planted_ids;
  std::map<std::string, double> timing_seconds;
};

// classify -> stats -> filter -> score -> shortlist -> validate, writing
// vocab.jsonl, histogram.csv, filtered_pairs.jsonl, scores.csv,
// validation.csv and report.json. Any stage failure writes manifest.json and
// throws StageFailure.
DetectionReport detect(Session& session);

// The report without timing, with sorted keys: identical for identical configs.
nlohmann::json report_body(const DetectionReport& report, const Session& session);
nlohmann::json report_json(const DetectionReport& report, const Session& session);

nlohmann::json load_report(const std::string& path);
// Omega recomputed from the stored G values and epsilon.
std::vector<TokenId> rederive_omega(const nlohmann::json& report);
std::vector<TokenId> report_omega(const nlohmann::json& report);

// Maps an exception to the CLI exit code: 2 config/data, 3 backend, 4
// insufficient data, 1 otherwise.
int exit_code_for(std::exception_ptr e);

}  // namespace sticky

namespace sticky {

// Subcommand bodies. Each writes its artifacts under config.out and returns
// a JSON summary for stdout.
nlohmann::json classify_command(Session& session);
nlohmann::json stats_command(Session& session);
// Writes filtered_pairs.jsonl, scores.csv and shortlist.json.
nlohmann::json score_command(Session& session);
// Reads shortlist.json and filtered_pairs.jsonl left by score_command.
nlohmann::json validate_command(Session& session);
nlohmann::json detect_command(Session& session);
// sweep_<id>.csv per token (n, mean similarity over pairs and ops) and sweep_detail.csv.
nlohmann::json sweep_command(Session& session);
nlohmann::json impact_command(Session& session);

}  // namespace sticky
