#include "sticky/toy.h"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "sticky/error.h"
#include "sticky/rng.h"
#include "sticky/utf8.h"

namespace sticky {
namespace {

constexpr const char* kSpecials[] = {"[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"};
// Byte entries: three render to broken UTF-8, one to "A" (which has its own id).
// Then a bracketed non-special and an entry WhitespaceSplit can never produce.
constexpr const char* kOddEntries[] = {"<0x80>", "<0xC3>", "<0xFF>", "<0x41>", "A", "<extra_0>", "new york"};

std::string make_word(XorShift64Star& rng) {
  static constexpr const char* onsets[] = {"b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z",
                                           "br", "st", "pl", "gr", "sh", "ch"};
  static constexpr const char* vowels[] = {"a", "e", "i", "o", "u", "ai", "ou", "ea"};
  std::string w;
  const auto syllables = 2 + rng.below(2);
  for (std::uint64_t s = 0; s < syllables; ++s) {
    w += onsets[rng.below(std::size(onsets))];
    w += vowels[rng.below(std::size(vowels))];
  }
  if (rng.below(3) == 0) w += "n";
  return w;
}

std::string sentence(XorShift64Star& rng, const std::vector<std::string>& pool, std::size_t len) {
  std::string out;
  for (std::size_t i = 0; i < len; ++i) {
    if (i) out += ' ';
    out += pool[rng.below(pool.size())];
  }
  return out;
}

}  // namespace

ToyFixture make_toy_fixture(const ToyOptions& options) {
  if (options.words < options.planted + 200) throw ConfigError("toy vocabulary too small");
  XorShift64Star rng(derive_seed(options.seed, {0x746F79}));
  ToyFixture fx;

  std::set<std::string> seen{"a"};
  fx.words.push_back("a");
  while (fx.words.size() < options.words) {
    auto w = make_word(rng);
    if (seen.insert(w).second) fx.words.push_back(w);
  }

  nlohmann::json added = nlohmann::json::array();
  nlohmann::json vocab = nlohmann::json::object();
  TokenId id = 0;
  for (const char* s : kSpecials) {
    vocab[s] = id;
    added.push_back({{"id", id},
                     {"content", s},
                     {"single_word", false},
                     {"lstrip", false},
                     {"rstrip", false},
                     {"normalized", false},
                     {"special", true}});
    ++id;
  }
  for (const char* s : kOddEntries) vocab[s] = id++;
  const TokenId first_word = id;
  for (const auto& w : fx.words) vocab[w] = id++;

  // Planted ids: distinct ordinary words, never "a".
  std::set<std::size_t> planted_idx;
  while (planted_idx.size() < options.planted) planted_idx.insert(1 + rng.below(fx.words.size() - 1));
  std::vector<std::string> ordinary;
  for (std::size_t i = 0; i < fx.words.size(); ++i) {
    if (planted_idx.contains(i)) {
      fx.planted_ids.push_back(first_word + static_cast<TokenId>(i));
      fx.planted_words.push_back(fx.words[i]);
    } else if (i != 0) {
      ordinary.push_back(fx.words[i]);
    }
  }

  fx.tokenizer_json = {
      {"version", "1.0"},
      {"truncation", nullptr},
      {"padding", nullptr},
      {"added_tokens", added},
      {"normalizer", nullptr},
      {"pre_tokenizer", {{"type", "WhitespaceSplit"}}},
      {"post_processor", nullptr},
      {"decoder", {{"type", "Sequence"}, {"decoders", {{{"type", "ByteFallback"}}, {{"type", "Fuse"}}}}}},
      {"model", {{"type", "WordLevel"}, {"vocab", vocab}, {"unk_token", "[UNK]"}}},
  };

  // Pairs: s2 reuses a few words of s1 so baselines spread on both sides of u.
  for (std::size_t p = 0; p < options.pairs; ++p) {
    const std::size_t len1 = 8 + rng.below(9);
    const std::size_t len2 = 8 + rng.below(9);
    SentencePair pair;
    pair.s1 = sentence(rng, ordinary, len1);
    const auto w1 = utf8::split_whitespace(pair.s1);
    const std::size_t shared = rng.below(3);
    std::vector<std::string> w2;
    for (std::size_t i = 0; i < len2; ++i) {
      w2.push_back(i < shared ? w1[rng.below(w1.size())] : ordinary[rng.below(ordinary.size())]);
    }
    for (std::size_t i = w2.size(); i > 1; --i) std::swap(w2[i - 1], w2[rng.below(i)]);
    for (std::size_t i = 0; i < w2.size(); ++i) pair.s2 += (i ? " " : "") + w2[i];
    pair.source_tag = "toy";
    fx.pairs.push_back(std::move(pair));
  }

  // Retrieval corpus: disjoint topic vocabularies, filler from the rest.
  const std::size_t topic_size = 12;
  std::vector<std::string> shuffled = ordinary;
  for (std::size_t i = shuffled.size(); i > 1; --i) std::swap(shuffled[i - 1], shuffled[rng.below(i)]);
  std::vector<std::vector<std::string>> topics(options.topics);
  std::size_t cursor = 0;
  for (auto& t : topics) {
    t.assign(shuffled.begin() + static_cast<std::ptrdiff_t>(cursor),
             shuffled.begin() + static_cast<std::ptrdiff_t>(cursor + topic_size));
    cursor += topic_size;
  }
  const std::vector<std::string> filler(shuffled.begin() + static_cast<std::ptrdiff_t>(cursor), shuffled.end());

  std::size_t doc_no = 0;
  for (std::size_t t = 0; t < topics.size(); ++t) {
    char qid[24];
    std::snprintf(qid, sizeof qid, "q%02zu", t);
    fx.corpus.queries[qid] = sentence(rng, topics[t], 5);
    for (std::size_t j = 0; j < options.docs_per_topic; ++j, ++doc_no) {
      char did[24];
      std::snprintf(did, sizeof did, "d%03zu", doc_no);
      const std::size_t len = 8 + rng.below(53);
      const double share = 0.3 + 0.3 * rng.uniform();
      std::string text;
      for (std::size_t i = 0; i < len; ++i) {
        if (i) text += ' ';
        text += rng.uniform() < share ? topics[t][rng.below(topic_size)] : filler[rng.below(filler.size())];
      }
      fx.corpus.documents[did] = text;
      fx.corpus.qrels[qid][did] = share >= 0.45 ? 2 : 1;
    }
  }
  fx.corpus.validate();
  return fx;
}

ToyPaths write_toy_fixture(const ToyFixture& fixture, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  ToyPaths p{(fs::path(dir) / "tokenizer.json").string(), (fs::path(dir) / "pairs.jsonl").string(),
             (fs::path(dir) / "docs.jsonl").string(), (fs::path(dir) / "queries.jsonl").string(),
             (fs::path(dir) / "qrels.jsonl").string()};
  {
    std::ofstream out(p.tokenizer);
    if (!out) throw Error("cannot write " + p.tokenizer);
    out << fixture.tokenizer_json.dump(1) << '\n';
  }
  {
    std::ofstream out(p.pairs);
    if (!out) throw Error("cannot write " + p.pairs);
    write_pairs_jsonl(out, fixture.pairs);
  }
  write_corpus(fixture.corpus, p.docs, p.queries, p.qrels);
  return p;
}

}  // namespace sticky
