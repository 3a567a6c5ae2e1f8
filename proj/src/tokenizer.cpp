#include "sticky/tokenizer.h"

#include <algorithm>
#include <filesystem>

#include "sticky/error.h"
#include "sticky/hf_tokenizer.h"
#include "sticky/parallel.h"
#include "sticky/remote_tokenizer.h"
#include "sticky/utf8.h"

namespace sticky {

TokenizerHandle::TokenizerHandle(std::shared_ptr<const Tokenizer> impl) : impl_(std::move(impl)) {
  if (!impl_) throw ConfigError("tokenizer handle requires a backend");
  source_ = impl_->source();
  vocab_size_ = impl_->vocab_size();
  specials_ = impl_->declared_specials();
  std::sort(specials_.begin(), specials_.end());
  specials_.erase(std::unique(specials_.begin(), specials_.end()), specials_.end());

  // Probe: does a bare "a" come back as "a"? Metaspace-style and
  // prefix-space tokenizers render it with a leading space.
  std::string rendered;
  for (TokenId id : impl_->encode("a")) {
    auto bytes = id >= 0 ? impl_->decode_bytes(id) : std::nullopt;
    if (!bytes) {
      rendered.clear();
      rendered.push_back('\0');
      break;
    }
    rendered += *bytes;
  }
  adds_leading_space_ = rendered != "a";
  if (adds_leading_space_) prefix_ids_ = impl_->encode("<<");
}

TokenizerHandle TokenizerHandle::open(const std::string& source) {
  if (source.rfind("http://", 0) == 0 || source.rfind("https://", 0) == 0) {
    return TokenizerHandle(std::make_shared<RemoteTokenizer>(source));
  }
  if (!std::filesystem::exists(source)) {
    throw ConfigError("tokenizer file not found: " + source);
  }
  return TokenizerHandle(std::make_shared<HfTokenizer>(HfTokenizer::from_file(source)));
}

bool TokenizerHandle::is_declared_special(TokenId id) const {
  return std::binary_search(specials_.begin(), specials_.end(), id);
}

std::string_view to_string(TokenClass c) {
  switch (c) {
    case TokenClass::Undecodable: return "undecodable";
    case TokenClass::Unreachable: return "unreachable";
    case TokenClass::Special: return "special";
    case TokenClass::Other: return "other";
  }
  return "other";
}

TokenClass token_class_from_string(std::string_view s) {
  if (s == "undecodable") return TokenClass::Undecodable;
  if (s == "unreachable") return TokenClass::Unreachable;
  if (s == "special") return TokenClass::Special;
  if (s == "other") return TokenClass::Other;
  throw DataError("unknown token class: " + std::string(s));
}

bool matches_special_pattern(std::string_view s) {
  if (s.size() < 3) return false;
  return (s.front() == '<' && s.back() == '>') || (s.front() == '[' && s.back() == ']');
}

namespace {

bool roundtrips(const TokenizerHandle& handle, TokenId id, const std::string& surface) {
  const Tokenizer& tok = handle.tokenizer();
  if (!handle.adds_leading_space()) {
    const auto ids = tok.encode(surface);
    return ids.size() == 1 && ids[0] == id;
  }
  const auto& prefix = handle.roundtrip_prefix_ids();
  const auto ids = tok.encode("<<" + surface);
  if (ids.size() != prefix.size() + 1) return false;
  if (!std::equal(prefix.begin(), prefix.end(), ids.begin())) return false;
  return ids.back() == id;
}

}  // namespace

TokenRecord classify_token(const TokenizerHandle& handle, TokenId id) {
  if (id < 0 || static_cast<std::size_t>(id) >= handle.vocab_size()) {
    throw Error("token id out of range: " + std::to_string(id));
  }
  TokenRecord rec;
  rec.id = id;
  auto bytes = handle.tokenizer().decode_bytes(id);
  if (!bytes) {
    rec.cls = TokenClass::Undecodable;
    return rec;
  }
  rec.byte_len = bytes->size();
  if (!utf8::is_valid(*bytes)) {
    rec.cls = TokenClass::Undecodable;
    return rec;
  }
  rec.surface = std::move(*bytes);
  if (!roundtrips(handle, id, *rec.surface)) {
    rec.cls = TokenClass::Unreachable;
  } else if (handle.is_declared_special(id) || matches_special_pattern(*rec.surface)) {
    rec.cls = TokenClass::Special;
  } else {
    rec.cls = TokenClass::Other;
  }
  return rec;
}

ClassifiedVocabulary classify_vocabulary(const TokenizerHandle& handle, unsigned threads) {
  ClassifiedVocabulary out;
  out.records.resize(handle.vocab_size());
  parallel_for(handle.vocab_size(), threads, [&](std::size_t i) {
    out.records[i] = classify_token(handle, static_cast<TokenId>(i));
  });
  for (const auto& r : out.records) {
    if (r.cls != TokenClass::Undecodable && r.cls != TokenClass::Unreachable) {
      out.valid_ids.push_back(r.id);
    }
  }
  return out;
}

VocabularyCensus ClassifiedVocabulary::census() const {
  VocabularyCensus c;
  c.vocab_size = records.size();
  for (const auto& r : records) {
    switch (r.cls) {
      case TokenClass::Undecodable: ++c.undecodable; break;
      case TokenClass::Unreachable: ++c.unreachable; break;
      case TokenClass::Special: ++c.special; break;
      case TokenClass::Other: ++c.other; break;
    }
  }
  c.valid = valid_ids.size();
  return c;
}

nlohmann::json to_json(const TokenRecord& r) {
  nlohmann::json j;
  j["id"] = r.id;
  j["surface"] = r.surface ? nlohmann::json(*r.surface) : nlohmann::json(nullptr);
  j["byte_len"] = r.byte_len;
  j["class"] = std::string(to_string(r.cls));
  return j;
}

TokenRecord token_record_from_json(const nlohmann::json& j) {
  TokenRecord r;
  r.id = j.at("id").get<TokenId>();
  if (!j.at("surface").is_null()) r.surface = j.at("surface").get<std::string>();
  r.byte_len = j.at("byte_len").get<std::size_t>();
  r.cls = token_class_from_string(j.at("class").get<std::string>());
  return r;
}

void write_records_jsonl(std::ostream& out, const std::vector<TokenRecord>& records) {
  for (const auto& r : records) out << to_json(r).dump() << '\n';
}

}  // namespace sticky
