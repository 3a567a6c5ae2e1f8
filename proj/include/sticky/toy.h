#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sticky/corpus.h"
#include "sticky/impact.h"
#include "sticky/tokenizer.h"

namespace sticky {

// Small self-contained detection problem: a word-level tokenizer with every
// token class represented, a few planted ids meant to be sticky under the
// synthetic provider, sentence pairs, and a topic-structured retrieval corpus.
struct ToyOptions {
  std::uint64_t seed = 0;
  std::size_t words = 1980;
  std::size_t planted = 3;
  std::size_t pairs = 200;
  std::size_t topics = 10;
  std::size_t docs_per_topic = 5;
};

struct ToyFixture {
  nlohmann::json tokenizer_json;
  std::vector<std::string> words;  // ordinary words (including planted), by id
  std::vector<TokenId> planted_ids;
  std::vector<std::string> planted_words;
  std::vector<SentencePair> pairs;
  RetrievalCorpus corpus;
};

ToyFixture make_toy_fixture(const ToyOptions& options = {});

struct ToyPaths {
  std::string tokenizer;
  std::string pairs;
  std::string docs;
  std::string queries;
  std::string qrels;
};

// Writes tokenizer.json, pairs.jsonl, docs.jsonl, queries.jsonl, qrels.jsonl.
ToyPaths write_toy_fixture(const ToyFixture& fixture, const std::string& dir);

}  // namespace sticky
