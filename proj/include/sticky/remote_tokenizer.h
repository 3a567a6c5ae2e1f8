#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "sticky/http.h"
#include "sticky/tokenizer.h"

namespace sticky {

// Tokenizer backed by the embed shim's /vocab, /encode, /decode routes.
// Vocabulary entries are fetched in pages of `page_size` and only a few pages
// are held at once. Transport is serialized internally.
class RemoteTokenizer final : public Tokenizer {
 public:
  explicit RemoteTokenizer(std::string url, std::size_t page_size = 4096, RetryPolicy retry = {});

  std::size_t vocab_size() const override { return total_; }
  std::optional<std::string> decode_bytes(TokenId id) const override;
  std::vector<TokenId> encode(std::string_view text) const override;
  std::vector<TokenId> declared_specials() const override { return specials_; }
  std::string source() const override { return url_; }

  // POST /decode for a whole id sequence; nullopt when the shim reports the
  // sequence as undecodable.
  std::optional<std::string> decode_text(const std::vector<TokenId>& ids) const;

 private:
  struct Page {
    std::vector<std::optional<std::string>> bytes;
  };
  const Page& page_for(std::size_t page_index) const;  // requires mu_ held
  std::string post(const std::string& path, const std::string& body) const;
  std::string get(const std::string& path) const;

  std::string url_;
  Endpoint endpoint_;
  std::size_t page_size_;
  RetryPolicy retry_;
  std::size_t total_ = 0;
  std::vector<TokenId> specials_;

  mutable std::mutex mu_;
  mutable std::map<std::size_t, Page> pages_;
  mutable std::vector<std::size_t> page_order_;
  static constexpr std::size_t kMaxPages = 4;
};

}  // namespace sticky
