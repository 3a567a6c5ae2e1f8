#include "sticky/corpus.h"

#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "sticky/error.h"
#include "sticky/utf8.h"

namespace sticky {

using json = nlohmann::json;

PairFormat pair_format_for_path(const std::string& path) {
  auto ends_with = [&](std::string_view suffix) {
    return path.size() >= suffix.size() && path.compare(path.size() - suffix.size(), suffix.size(), suffix) == 0;
  };
  return ends_with(".jsonl") || ends_with(".json") ? PairFormat::Jsonl : PairFormat::Tsv;
}

PairFormat pair_format_from_string(const std::string& s) {
  if (s == "jsonl") return PairFormat::Jsonl;
  if (s == "tsv") return PairFormat::Tsv;
  throw ConfigError("unknown pair format: " + s);
}

LoadedPairs parse_pairs(std::istream& in, PairFormat format, const std::string& source_tag,
                        const PairLoadOptions& options) {
  LoadedPairs out;
  std::set<std::pair<std::string, std::string>> seen;
  std::string line;
  std::size_t line_no = 0;
  auto malformed = [&](const std::string& why) {
    return DataError(source_tag + ":" + std::to_string(line_no) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (utf8::trim(line).empty()) continue;
    ++out.lines;
    SentencePair p;
    p.source_tag = source_tag;
    if (format == PairFormat::Jsonl) {
      try {
        const json j = json::parse(line);
        p.s1 = j.at("s1").get<std::string>();
        p.s2 = j.at("s2").get<std::string>();
      } catch (const json::exception& e) {
        throw malformed(std::string("malformed JSON pair: ") + e.what());
      }
    } else {
      const auto tab = line.find('\t');
      if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
        throw malformed("expected exactly two tab-separated columns");
      }
      p.s1 = line.substr(0, tab);
      p.s2 = line.substr(tab + 1);
    }
    if (utf8::trim(p.s1).empty() || utf8::trim(p.s2).empty()) throw malformed("empty sentence");
    if (utf8::split_whitespace(p.s1).size() > options.max_words ||
        utf8::split_whitespace(p.s2).size() > options.max_words) {
      ++out.rejected_too_long;
      continue;
    }
    if (!seen.emplace(p.s1, p.s2).second) {
      ++out.duplicates;
      continue;
    }
    out.pairs.push_back(std::move(p));
  }
  if (out.lines == 0) throw DataError(source_tag + ": no sentence pairs");
  return out;
}

LoadedPairs load_pairs(const std::string& path, PairFormat format, const PairLoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open pair file: " + path);
  return parse_pairs(in, format, path, options);
}

double pair_similarity(const SentencePair& pair, const EmbeddingGateway& gateway) {
  const auto v = gateway.embed_batch({pair.s1, pair.s2});
  return cosine(v[0], v[1]);
}

FilterResult filter_pairs(std::vector<SentencePair>& pairs, const ModelStats& stats,
                          const EmbeddingGateway& gateway, std::size_t cap) {
  FilterResult r;
  std::vector<std::string> texts;
  texts.reserve(pairs.size() * 2);
  for (const auto& p : pairs) {
    texts.push_back(p.s1);
    texts.push_back(p.s2);
  }
  const auto vectors = gateway.embed_batch(texts);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    pairs[i].baseline_sim = cosine(vectors[2 * i], vectors[2 * i + 1]);
  }
  r.evaluated = pairs.size();
  for (const auto& p : pairs) {
    if (*p.baseline_sim < stats.u) {
      ++r.below_mean;
      if (cap == 0 || r.filtered.size() < cap) r.filtered.push_back(p);
    }
  }
  if (r.filtered.empty()) {
    r.warning = "no sentence pair has similarity below u = " + std::to_string(stats.u);
  }
  return r;
}

void write_pairs_jsonl(std::ostream& out, const std::vector<SentencePair>& pairs) {
  for (const auto& p : pairs) {
    json j = {{"s1", p.s1}, {"s2", p.s2}, {"source", p.source_tag}};
    j["baseline_sim"] = p.baseline_sim ? json(*p.baseline_sim) : json(nullptr);
    out << j.dump() << '\n';
  }
}

}  // namespace sticky
