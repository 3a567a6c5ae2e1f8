#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace sticky {

using TokenId = std::int32_t;

// Returned inside an encoding when a piece has no vocabulary entry and the
// model defines no unknown token. Never equals a real id, so any roundtrip
// containing it fails.
inline constexpr TokenId kNoToken = -1;

// Backend contract. Implementations must be safe for concurrent const calls.
class Tokenizer {
 public:
  virtual ~Tokenizer() = default;

  virtual std::size_t vocab_size() const = 0;

  // Raw bytes a single token renders to; nullopt when the decoder itself
  // fails. Byte validity is checked by the caller.
  virtual std::optional<std::string> decode_bytes(TokenId id) const = 0;

  // Encoding with special-token wrapping disabled (no BOS/EOS/CLS/SEP added).
  virtual std::vector<TokenId> encode(std::string_view text) const = 0;

  virtual std::vector<TokenId> declared_specials() const = 0;

  virtual std::string source() const = 0;
};

// A loaded tokenizer plus the probed leading-space capability.
class TokenizerHandle {
 public:
  explicit TokenizerHandle(std::shared_ptr<const Tokenizer> impl);

  // A local tokenizer.json path, or an http(s):// endpoint serving the shim
  // tokenizer routes.
  static TokenizerHandle open(const std::string& source);

  const Tokenizer& tokenizer() const { return *impl_; }
  std::size_t vocab_size() const { return vocab_size_; }
  const std::vector<TokenId>& declared_specials() const { return specials_; }
  bool is_declared_special(TokenId id) const;
  bool adds_leading_space() const { return adds_leading_space_; }
  const std::string& source() const { return source_; }

  // Ids of "<<" alone; empty unless adds_leading_space.
  const std::vector<TokenId>& roundtrip_prefix_ids() const { return prefix_ids_; }

 private:
  std::shared_ptr<const Tokenizer> impl_;
  std::string source_;
  std::size_t vocab_size_ = 0;
  std::vector<TokenId> specials_;  // sorted
  bool adds_leading_space_ = false;
  std::vector<TokenId> prefix_ids_;
};

enum class TokenClass { Undecodable, Unreachable, Special, Other };

std::string_view to_string(TokenClass c);
TokenClass token_class_from_string(std::string_view s);

struct TokenRecord {
  TokenId id = 0;
  std::optional<std::string> surface;
  std::size_t byte_len = 0;
  TokenClass cls = TokenClass::Other;

  friend bool operator==(const TokenRecord&, const TokenRecord&) = default;
};

struct VocabularyCensus {
  std::size_t vocab_size = 0;
  std::size_t undecodable = 0;
  std::size_t unreachable = 0;
  std::size_t special = 0;
  std::size_t other = 0;
  std::size_t valid = 0;  // "filter passed"
};

struct ClassifiedVocabulary {
  std::vector<TokenRecord> records;  // indexed by id
  std::vector<TokenId> valid_ids;    // ascending

  VocabularyCensus census() const;
  const TokenRecord& at(TokenId id) const { return records.at(static_cast<std::size_t>(id)); }
};

// Undecodable > Unreachable > Special > Other.
TokenRecord classify_token(const TokenizerHandle& handle, TokenId id);

ClassifiedVocabulary classify_vocabulary(const TokenizerHandle& handle, unsigned threads = 1);

// Full-match against <...> or [...] with non-empty content.
bool matches_special_pattern(std::string_view surface);

nlohmann::json to_json(const TokenRecord& r);
TokenRecord token_record_from_json(const nlohmann::json& j);
void write_records_jsonl(std::ostream& out, const std::vector<TokenRecord>& records);

}  // namespace sticky
