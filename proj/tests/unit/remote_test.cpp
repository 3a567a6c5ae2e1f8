#include <gtest/gtest.h>

#include <httplib.h>

#include <atomic>
#include <cmath>
#include <thread>

#include "sticky/base64.h"
#include "sticky/embedding.h"
#include "sticky/error.h"
#include "sticky/remote_tokenizer.h"
#include "sticky/tokenizer.h"

namespace sticky {
namespace {

using json = nlohmann::json;

// Minimal stand-in for the embedding/tokenizer shim, served in-process.
class FakeShim {
 public:
  // id -> raw bytes (nullopt: shim has no bytes for it)
  std::vector<std::optional<std::string>> vocab{std::string("[CLS]"), std::string("a"), std::string("word"),
                                                std::string("\xC3"), std::string("new york"), std::nullopt};
  std::vector<int> specials{0};
  std::size_t dim = 3;
  std::size_t reported_dim = 3;
  std::atomic<int> encode_failures_left{0};
  std::atomic<int> embed_calls{0};
  std::atomic<int> vocab_calls{0};
  std::size_t max_batch = 100;
  bool malformed_vocab = false;

  FakeShim() {
    server_.Get("/info", [this](const httplib::Request&, httplib::Response& res) {
      res.set_content(json{{"name", "fake"}, {"dim", reported_dim}, {"normalizes", false}, {"deterministic", true}}
                          .dump(),
                      "application/json");
    });
    server_.Post("/embed", [this](const httplib::Request& req, httplib::Response& res) {
      ++embed_calls;
      json body;
      try {
        body = json::parse(req.body);
      } catch (...) {
        res.status = 400;
        res.set_content(R"({"error":"malformed body"})", "application/json");
        return;
      }
      const auto texts = body.at("texts").get<std::vector<std::string>>();
      if (texts.size() > max_batch) {
        res.status = 413;
        return;
      }
      json out = json::array();
      for (const auto& t : texts) {
        // length, vowel count, 1: deterministic and never zero
        double vowels = 0;
        for (char c : t) vowels += std::string("aeiou").find(c) != std::string::npos;
        std::vector<double> v{static_cast<double>(t.size()), vowels, 1.0};
        v.resize(dim, 0.5);
        out.push_back(v);
      }
      res.set_content(json{{"embeddings", out}, {"dim", reported_dim}}.dump(), "application/json");
    });
    server_.Post("/encode", [this](const httplib::Request& req, httplib::Response& res) {
      if (encode_failures_left > 0) {
        --encode_failures_left;
        res.status = 503;
        return;
      }
      const auto text = json::parse(req.body).at("text").get<std::string>();
      std::vector<int> ids;
      // whole-text lookup, else split on spaces
      for (std::size_t i = 0; i < vocab.size(); ++i) {
        if (vocab[i] && *vocab[i] == text && text.find(' ') == std::string::npos) ids.push_back(static_cast<int>(i));
      }
      if (ids.empty()) {
        std::size_t pos = 0;
        while (pos <= text.size()) {
          auto next = text.find(' ', pos);
          if (next == std::string::npos) next = text.size();
          const auto piece = text.substr(pos, next - pos);
          int found = 1;  // unknown words map to "a" for simplicity
          for (std::size_t i = 0; i < vocab.size(); ++i) {
            if (vocab[i] && *vocab[i] == piece) found = static_cast<int>(i);
          }
          ids.push_back(found);
          pos = next + 1;
        }
      }
      res.set_content(json{{"ids", ids}}.dump(), "application/json");
    });
    server_.Post("/decode", [this](const httplib::Request& req, httplib::Response& res) {
      std::string out;
      for (int id : json::parse(req.body).at("ids").get<std::vector<int>>()) {
        if (!vocab.at(id)) {
          res.set_content(R"({"error":"undecodable"})", "application/json");
          return;
        }
        out += *vocab.at(id);
      }
      res.set_content(json{{"text", out}}.dump(), "application/json");
    });
    server_.Get("/vocab", [this](const httplib::Request& req, httplib::Response& res) {
      ++vocab_calls;
      if (malformed_vocab) {
        res.set_content(R"({"total": "many"})", "application/json");
        return;
      }
      const auto offset = std::stoul(req.get_param_value("offset"));
      const auto limit = std::stoul(req.get_param_value("limit"));
      json entries = json::array();
      for (std::size_t i = offset; i < std::min(vocab.size(), offset + limit); ++i) {
        entries.push_back({{"id", i}, {"bytes_b64", vocab[i] ? json(base64::encode(*vocab[i])) : json(nullptr)}});
      }
      res.set_content(json{{"total", vocab.size()}, {"specials", specials}, {"entries", entries}}.dump(),
                      "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeShim() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

RetryPolicy fast_retry(int attempts = 3) { return {attempts, std::chrono::milliseconds(1)}; }

TEST(RemoteTokenizer, ReadsVocabularyInPages) {
  FakeShim shim;
  RemoteTokenizer tok(shim.url(), 2, fast_retry());
  EXPECT_EQ(tok.vocab_size(), 6u);
  EXPECT_EQ(tok.declared_specials(), (std::vector<TokenId>{0}));
  EXPECT_EQ(tok.decode_bytes(2), "word");
  EXPECT_EQ(tok.decode_bytes(3), std::string("\xC3"));
  EXPECT_EQ(tok.decode_bytes(5), std::nullopt);
  EXPECT_EQ(tok.decode_bytes(6), std::nullopt);
  const int calls = shim.vocab_calls;
  EXPECT_EQ(tok.decode_bytes(2), "word");  // cached page
  EXPECT_EQ(shim.vocab_calls, calls);
}

TEST(RemoteTokenizer, EncodeAndDecodeText) {
  FakeShim shim;
  RemoteTokenizer tok(shim.url(), 4096, fast_retry());
  EXPECT_EQ(tok.encode("word"), (std::vector<TokenId>{2}));
  EXPECT_EQ(tok.encode("new york"), (std::vector<TokenId>{1, 1}));
  EXPECT_EQ(tok.decode_text({1, 2}), "aword");
  EXPECT_EQ(tok.decode_text({5}), std::nullopt);  // error field, not a transport fault
}

TEST(RemoteTokenizer, RetriesTransientFailures) {
  FakeShim shim;
  RemoteTokenizer tok(shim.url(), 4096, fast_retry(3));
  shim.encode_failures_left = 2;
  EXPECT_EQ(tok.encode("word"), (std::vector<TokenId>{2}));
  shim.encode_failures_left = 5;
  EXPECT_THROW(tok.encode("word"), TransportError);
}

TEST(RemoteTokenizer, MalformedVocabIsTransportError) {
  FakeShim shim;
  shim.malformed_vocab = true;
  EXPECT_THROW(RemoteTokenizer(shim.url(), 4096, fast_retry()), TransportError);
}

TEST(RemoteTokenizer, UnreachableServerIsTransportError) {
  std::string url;
  {
    FakeShim shim;
    url = shim.url();
  }
  EXPECT_THROW(RemoteTokenizer(url, 4096, fast_retry(2)), TransportError);
}

TEST(RemoteTokenizer, ClassifiesThroughHandle) {
  FakeShim shim;
  auto h = TokenizerHandle::open(shim.url());
  EXPECT_FALSE(h.adds_leading_space());
  const auto v = classify_vocabulary(h, 3);
  EXPECT_EQ(v.at(0).cls, TokenClass::Special);
  EXPECT_EQ(v.at(1).cls, TokenClass::Other);
  EXPECT_EQ(v.at(2).cls, TokenClass::Other);
  EXPECT_EQ(v.at(3).cls, TokenClass::Undecodable);
  EXPECT_EQ(v.at(4).cls, TokenClass::Unreachable);
  EXPECT_EQ(v.at(5).cls, TokenClass::Undecodable);
}

TEST(RemoteProvider, ReadsInfoAndEmbeds) {
  FakeShim shim;
  auto p = std::make_shared<RemoteProvider>(shim.url(), fast_retry());
  EXPECT_EQ(p->info().name, "fake");
  EXPECT_EQ(p->info().dim, 3u);
  EXPECT_TRUE(p->info().single_flight);
  const auto raw = p->embed({"abc"});
  ASSERT_EQ(raw.size(), 1u);
  EXPECT_EQ(raw[0], (std::vector<double>{3, 1, 1}));
}

TEST(RemoteProvider, GatewayBatchesAndNormalizes) {
  FakeShim shim;
  GatewayOptions opts;
  opts.batch_size = 2;
  opts.retry = fast_retry();
  EmbeddingGateway g(std::make_shared<RemoteProvider>(shim.url(), fast_retry()), opts);
  const auto v = g.embed_batch({"a", "bb", "ccc", "dddd", "eeeee"});
  ASSERT_EQ(v.size(), 5u);
  EXPECT_EQ(shim.embed_calls, 3);
  for (const auto& x : v) {
    double n = 0;
    for (double c : x.values()) n += c * c;
    EXPECT_NEAR(n, 1.0, 1e-12);
  }
  g.embed_batch({"a", "eeeee"});
  EXPECT_EQ(shim.embed_calls, 3);  // cached
}

TEST(RemoteProvider, DimMismatchIsTransportError) {
  FakeShim shim;
  auto p = std::make_shared<RemoteProvider>(shim.url(), fast_retry());
  shim.reported_dim = 4;
  EXPECT_THROW(p->embed({"x"}), TransportError);
}

TEST(RemoteProvider, OversizeBatchSurfacesAsTransportError) {
  FakeShim shim;
  shim.max_batch = 1;
  GatewayOptions opts;
  opts.batch_size = 4;
  opts.retry = fast_retry(1);
  EmbeddingGateway g(std::make_shared<RemoteProvider>(shim.url(), fast_retry()), opts);
  EXPECT_THROW(g.embed_batch({"a", "b"}), TransportError);
}

TEST(Base64, RoundTripsArbitraryBytes) {
  std::string all;
  for (int i = 0; i < 256; ++i) all.push_back(static_cast<char>(i));
  for (std::size_t len : {0u, 1u, 2u, 3u, 4u, 255u, 256u}) {
    const auto s = all.substr(0, len);
    EXPECT_EQ(base64::decode(base64::encode(s)), s);
  }
  EXPECT_EQ(base64::encode("\xC3"), "ww==");
  EXPECT_THROW(base64::decode("!!!"), DataError);
}

TEST(Endpoint, SplitsOriginAndBase) {
  auto e = parse_endpoint("http://host:8080/api/v1/");
  EXPECT_EQ(e.origin, "http://host:8080");
  EXPECT_EQ(e.base, "/api/v1");
  EXPECT_EQ(parse_endpoint("http://h").base, "");
  EXPECT_THROW(parse_endpoint("localhost:8080"), ConfigError);
}

}  // namespace
}  // namespace sticky
