#pragma once

#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "sticky/tokenizer.h"

namespace sticky {

// Reader for the single-file tokenizer definition (tokenizer.json) that
// public model hubs ship. Supported models: WordLevel, WordPiece, BPE
// (including byte-level and byte-fallback), Unigram. Unicode normalization
// forms (NFC/NFKC/Precompiled) are treated as identity.
//
// decode_bytes() renders one token the way a decoder would without any
// post-hoc stripping, so Metaspace pieces keep their leading space.
class HfTokenizer final : public Tokenizer {
 public:
  static HfTokenizer from_file(const std::string& path);
  static HfTokenizer from_json(const nlohmann::json& def, std::string source = "<memory>");

  std::size_t vocab_size() const override;
  std::optional<std::string> decode_bytes(TokenId id) const override;
  std::vector<TokenId> encode(std::string_view text) const override;
  std::vector<TokenId> declared_specials() const override;
  std::string source() const override;

  // Raw vocabulary string for an id (before decoding), if the id exists.
  std::optional<std::string> token_string(TokenId id) const;

  struct Impl;

 private:
  explicit HfTokenizer(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

}  // namespace sticky
