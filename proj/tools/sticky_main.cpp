// Command-line front end for sticky-token detection.

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "sticky/config.h"
#include "sticky/error.h"
#include "sticky/pipeline.h"
#include "sticky/toy.h"

namespace {

struct SharedFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string provider;
  std::string tokenizer;
  std::string format = "json";
  std::vector<std::string> sets;
  std::optional<unsigned> threads;
};

void add_shared(CLI::App* cmd, SharedFlags& f) {
  cmd->add_option("--config", f.config_path, "key=value config file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "master seed");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--provider", f.provider, "embedding provider: synthetic or an http(s) URL");
  cmd->add_option("--tokenizer", f.tokenizer, "tokenizer.json path, http(s) URL, or toy");
  cmd->add_option("--format", f.format, "summary format on stdout")->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--set", f.sets, "override a config key (key=value), repeatable");
  cmd->add_option("--threads", f.threads, "worker threads (0 = all cores)");
}

sticky::PipelineConfig build_config(const SharedFlags& f) {
  sticky::ConfigMap overrides;
  for (const auto& s : f.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw sticky::ConfigError("--set expects key=value, got '" + s + "'");
    overrides[s.substr(0, eq)] = s.substr(eq + 1);
  }
  if (f.seed) overrides["seed"] = std::to_string(*f.seed);
  if (!f.out.empty()) overrides["out"] = f.out;
  if (!f.provider.empty()) overrides["provider"] = f.provider;
  if (!f.tokenizer.empty()) overrides["tokenizer"] = f.tokenizer;
  if (f.threads) overrides["threads"] = std::to_string(*f.threads);
  std::optional<std::string> path;
  if (!f.config_path.empty()) path = f.config_path;
  return sticky::load_config(path, overrides);
}

void print_csv(const nlohmann::json& j, const std::string& prefix = "") {
  for (const auto& [key, value] : j.items()) {
    const std::string name = prefix.empty() ? key : prefix + "." + key;
    if (value.is_object()) {
      print_csv(value, name);
    } else {
      std::cout << name << ',' << (value.is_string() ? value.get<std::string>() : value.dump()) << '\n';
    }
  }
}

void emit(const nlohmann::json& j, const std::string& format) {
  if (format == "csv") {
    std::cout << "key,value\n";
    print_csv(j);
  } else {
    std::cout << j.dump(2) << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Find sticky tokens: vocabulary entries that pull sentence embeddings toward the mean"};
  app.require_subcommand(1);

  SharedFlags flags;
  using Command = nlohmann::json (*)(sticky::Session&);
  const std::map<std::string, std::pair<std::string, Command>> commands{
      {"classify-vocab", {"classify every vocabulary entry", sticky::classify_command}},
      {"stats", {"mean/std of pairwise token-embedding cosine and histogram", sticky::stats_command}},
      {"score", {"filter pairs, score every valid token, shortlist", sticky::score_command}},
      {"validate", {"validate the shortlist left by score", sticky::validate_command}},
      {"detect", {"full pipeline with report", sticky::detect_command}},
      {"sweep", {"similarity vs insertion count curves", sticky::sweep_command}},
      {"impact", {"retrieval nDCG@10 with sticky vs normal tokens inserted", sticky::impact_command}},
  };
  for (const auto& [name, entry] : commands) add_shared(app.add_subcommand(name, entry.first), flags);

  std::string toy_dir;
  auto* make_toy = app.add_subcommand("make-toy", "write the built-in toy fixture");
  make_toy->add_option("dir", toy_dir, "target directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (make_toy->parsed()) {
      const auto fx = sticky::make_toy_fixture();
      const auto paths = sticky::write_toy_fixture(fx, toy_dir);
      emit({{"tokenizer", paths.tokenizer},
            {"pairs", paths.pairs},
            {"docs", paths.docs},
            {"queries", paths.queries},
            {"qrels", paths.qrels},
            {"planted_ids", fx.planted_ids}},
           "json");
      return 0;
    }
    for (const auto& [name, entry] : commands) {
      if (!app.got_subcommand(name)) continue;
      sticky::Session session(build_config(flags));
      emit(entry.second(session), flags.format);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "sticky: " << e.what() << '\n';
    return sticky::exit_code_for(std::current_exception());
  }
  return 1;
}
