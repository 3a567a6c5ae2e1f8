#include "sticky/hf_tokenizer.h"

#include <algorithm>
#include <array>
#include <fstream>
#include <limits>
#include <regex>
#include <unordered_map>
#include <variant>

#include "sticky/error.h"
#include "sticky/utf8.h"

namespace sticky {

namespace {

using json = nlohmann::json;

// GPT-2 byte <-> printable code point table.
struct ByteTable {
  std::array<char32_t, 256> to_char{};
  std::unordered_map<char32_t, unsigned char> to_byte;

  ByteTable() {
    std::array<bool, 256> direct{};
    for (int b = '!'; b <= '~'; ++b) direct[b] = true;
    for (int b = 0xA1; b <= 0xAC; ++b) direct[b] = true;
    for (int b = 0xAE; b <= 0xFF; ++b) direct[b] = true;
    char32_t extra = 256;
    for (int b = 0; b < 256; ++b) {
      to_char[b] = direct[b] ? static_cast<char32_t>(b) : extra++;
      to_byte[to_char[b]] = static_cast<unsigned char>(b);
    }
  }
};

const ByteTable& byte_table() {
  static const ByteTable table;
  return table;
}

std::string bytes_to_level_chars(std::string_view bytes) {
  std::string out;
  for (unsigned char b : bytes) out += utf8::encode(byte_table().to_char[b]);
  return out;
}

std::string replace_all(std::string s, std::string_view from, std::string_view to) {
  if (from.empty()) return s;
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
  return s;
}

std::optional<unsigned char> parse_byte_token(std::string_view tok) {
  // <0xHH>
  if (tok.size() != 6 || tok.substr(0, 3) != "<0x" || tok.back() != '>') return std::nullopt;
  auto hex = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    return -1;
  };
  const int hi = hex(tok[3]);
  const int lo = hex(tok[4]);
  if (hi < 0 || lo < 0) return std::nullopt;
  return static_cast<unsigned char>(hi * 16 + lo);
}

std::string byte_token(unsigned char b) {
  static const char* digits = "0123456789ABCDEF";
  std::string s = "<0x";
  s.push_back(digits[b >> 4]);
  s.push_back(digits[b & 0xF]);
  s.push_back('>');
  return s;
}

// ---------------------------------------------------------------------------
// Normalizers

struct Lowercase {};
struct BertNormalizer {
  bool clean_text = true;
  bool handle_chinese_chars = true;
  bool strip_accents = true;
  bool lowercase = true;
};
struct StripAccents {};
struct Strip {
  bool left = true;
  bool right = true;
};
struct ReplaceNorm {
  std::string literal;
  std::optional<std::regex> regex;
  std::string content;
};
struct Prepend {
  std::string prepend;
};
using Normalizer = std::variant<Lowercase, BertNormalizer, StripAccents, Strip, ReplaceNorm, Prepend>;

std::string normalize_with(const Normalizer& n, const std::string& s) {
  return std::visit(
      [&](const auto& step) -> std::string {
        using T = std::decay_t<decltype(step)>;
        if constexpr (std::is_same_v<T, Lowercase>) {
          std::u32string cps = utf8::decode(s);
          for (auto& c : cps) c = utf8::to_lower(c);
          return utf8::encode(cps);
        } else if constexpr (std::is_same_v<T, BertNormalizer>) {
          std::u32string out;
          for (char32_t c : utf8::decode(s)) {
            if (step.clean_text) {
              if (c == 0 || c == 0xFFFD || utf8::is_control(c)) continue;
              if (utf8::is_whitespace(c)) c = U' ';
            }
            if (step.strip_accents) {
              if (c >= 0x300 && c <= 0x36F) continue;
              c = utf8::strip_accent(c);
            }
            if (step.lowercase) c = utf8::to_lower(c);
            if (step.handle_chinese_chars && utf8::is_cjk(c)) {
              out.push_back(U' ');
              out.push_back(c);
              out.push_back(U' ');
            } else {
              out.push_back(c);
            }
          }
          return utf8::encode(out);
        } else if constexpr (std::is_same_v<T, StripAccents>) {
          std::u32string out;
          for (char32_t c : utf8::decode(s)) {
            if (c >= 0x300 && c <= 0x36F) continue;
            out.push_back(utf8::strip_accent(c));
          }
          return utf8::encode(out);
        } else if constexpr (std::is_same_v<T, Strip>) {
          std::size_t b = 0, e = s.size();
          auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; };
          if (step.left) while (b < e && ws(s[b])) ++b;
          if (step.right) while (e > b && ws(s[e - 1])) --e;
          return s.substr(b, e - b);
        } else if constexpr (std::is_same_v<T, ReplaceNorm>) {
          if (step.regex) return std::regex_replace(s, *step.regex, step.content);
          return replace_all(s, step.literal, step.content);
        } else {
          return s.empty() ? s : step.prepend + s;
        }
      },
      n);
}

// ---------------------------------------------------------------------------
// Pre-tokenizers

struct WhitespacePre {};       // \w+|[^\w\s]+
struct WhitespaceSplitPre {};  // split on whitespace
struct BertPre {};
struct PunctuationPre {
  bool contiguous = false;
};
struct DigitsPre {
  bool individual = false;
};
struct MetaspacePre {
  std::string replacement = "\xE2\x96\x81";
  enum class Scheme { Always, First, Never } scheme = Scheme::Always;
  bool split = true;
};
struct ByteLevelPre {
  bool add_prefix_space = false;
  bool use_regex = true;
};
struct SplitPre {
  std::string literal;
  std::optional<std::regex> regex;
  bool gpt_fallback = false;
  bool removed = false;
};
using PreTokenizer = std::variant<WhitespacePre, WhitespaceSplitPre, BertPre, PunctuationPre, DigitsPre,
                                  MetaspacePre, ByteLevelPre, SplitPre>;

bool is_word_char(char32_t c) {
  return utf8::is_letter(c) || utf8::is_digit(c) || c == U'_' || (c >= 0x300 && c <= 0x36F);
}

// Approximation of 's|'t|'re|'ve|'m|'ll|'d| ?\p{L}+| ?\p{N}+| ?[^\s\p{L}\p{N}]+|\s+(?!\S)|\s+
std::vector<std::string> gpt2_split(const std::string& text) {
  const std::u32string s = utf8::decode(text);
  std::vector<std::string> out;
  const std::size_t n = s.size();
  auto kind = [&](std::size_t i) {
    const char32_t c = s[i];
    if (utf8::is_whitespace(c)) return 0;
    if (utf8::is_letter(c)) return 1;
    if (utf8::is_digit(c)) return 2;
    return 3;
  };
  auto run = [&](std::size_t i, int k) {
    while (i < n && kind(i) == k) ++i;
    return i;
  };
  std::size_t i = 0;
  while (i < n) {
    if (s[i] == U'\'' && i + 1 < n) {
      static const std::array<std::u32string_view, 7> contractions = {U"s", U"t", U"re", U"ve",
                                                                        U"m", U"ll", U"d"};
      bool matched = false;
      for (auto c : contractions) {
        if (s.compare(i + 1, c.size(), c) == 0) {
          out.push_back(utf8::encode(s.substr(i, 1 + c.size())));
          i += 1 + c.size();
          matched = true;
          break;
        }
      }
      if (matched) continue;
    }
    const int k = kind(i);
    if (k != 0) {
      const std::size_t e = run(i, k);
      out.push_back(utf8::encode(s.substr(i, e - i)));
      i = e;
      continue;
    }
    const std::size_t e = run(i, 0);
    if (e == n) {
      out.push_back(utf8::encode(s.substr(i, e - i)));
      i = e;
      continue;
    }
    if (e - i > 1) {
      out.push_back(utf8::encode(s.substr(i, e - i - 1)));
      i = e - 1;
    }
    if (s[i] == U' ') {
      const std::size_t e2 = run(i + 1, kind(i + 1));
      out.push_back(utf8::encode(s.substr(i, e2 - i)));
      i = e2;
    } else {
      out.push_back(utf8::encode(s.substr(i, 1)));
      i += 1;
    }
  }
  return out;
}

std::vector<std::string> pre_tokenize_with(const PreTokenizer& p, const std::string& piece, bool first_segment) {
  return std::visit(
      [&](const auto& step) -> std::vector<std::string> {
        using T = std::decay_t<decltype(step)>;
        std::vector<std::string> out;
        if constexpr (std::is_same_v<T, WhitespacePre>) {
          const std::u32string s = utf8::decode(piece);
          std::size_t i = 0;
          while (i < s.size()) {
            if (utf8::is_whitespace(s[i])) {
              ++i;
              continue;
            }
            const bool word = is_word_char(s[i]);
            std::size_t e = i;
            while (e < s.size() && !utf8::is_whitespace(s[e]) && is_word_char(s[e]) == word) ++e;
            out.push_back(utf8::encode(s.substr(i, e - i)));
            i = e;
          }
        } else if constexpr (std::is_same_v<T, WhitespaceSplitPre>) {
          out = utf8::split_whitespace(piece);
        } else if constexpr (std::is_same_v<T, BertPre> || std::is_same_v<T, PunctuationPre>) {
          const std::u32string s = utf8::decode(piece);
          std::u32string cur;
          bool cur_punct = false;
          auto flush = [&] {
            if (!cur.empty()) out.push_back(utf8::encode(cur));
            cur.clear();
          };
          constexpr bool split_ws = std::is_same_v<T, BertPre>;
          bool contiguous = false;
          if constexpr (std::is_same_v<T, PunctuationPre>) contiguous = step.contiguous;
          for (char32_t c : s) {
            if (split_ws && utf8::is_whitespace(c)) {
              flush();
            } else if (utf8::is_punctuation(c)) {
              if (!(contiguous && cur_punct)) flush();
              cur.push_back(c);
              cur_punct = true;
              if (!contiguous) flush();
            } else {
              if (cur_punct) flush();
              cur_punct = false;
              cur.push_back(c);
            }
          }
          flush();
        } else if constexpr (std::is_same_v<T, DigitsPre>) {
          const std::u32string s = utf8::decode(piece);
          std::u32string cur;
          bool cur_digit = false;
          for (char32_t c : s) {
            const bool d = utf8::is_digit(c);
            if (!cur.empty() && (d != cur_digit || (d && step.individual))) {
              out.push_back(utf8::encode(cur));
              cur.clear();
            }
            cur.push_back(c);
            cur_digit = d;
          }
          if (!cur.empty()) out.push_back(utf8::encode(cur));
        } else if constexpr (std::is_same_v<T, MetaspacePre>) {
          std::string s = replace_all(piece, " ", step.replacement);
          const bool prepend = step.scheme == MetaspacePre::Scheme::Always ||
                               (step.scheme == MetaspacePre::Scheme::First && first_segment);
          if (prepend && s.rfind(step.replacement, 0) != 0) s = step.replacement + s;
          if (!step.split) {
            out.push_back(s);
          } else {
            std::size_t start = 0;
            std::size_t pos = s.find(step.replacement, 1);
            while (pos != std::string::npos) {
              if (pos > start) out.push_back(s.substr(start, pos - start));
              start = pos;
              pos = s.find(step.replacement, pos + step.replacement.size());
            }
            if (start < s.size()) out.push_back(s.substr(start));
          }
        } else if constexpr (std::is_same_v<T, ByteLevelPre>) {
          std::string s = piece;
          if (step.add_prefix_space && first_segment && !s.empty() && s[0] != ' ') s = " " + s;
          const auto parts = step.use_regex ? gpt2_split(s) : std::vector<std::string>{s};
          for (const auto& part : parts) out.push_back(bytes_to_level_chars(part));
        } else {
          if (step.gpt_fallback) return gpt2_split(piece);
          // Isolated (default) or Removed.
          std::size_t last = 0;
          auto emit_match = [&](std::size_t b, std::size_t e) {
            if (b > last) out.push_back(piece.substr(last, b - last));
            if (!step.removed && e > b) out.push_back(piece.substr(b, e - b));
            last = e;
          };
          if (step.regex) {
            for (auto it = std::sregex_iterator(piece.begin(), piece.end(), *step.regex);
                 it != std::sregex_iterator(); ++it) {
              if (it->length(0) == 0) continue;
              const auto b = static_cast<std::size_t>(it->position(0));
              emit_match(b, b + static_cast<std::size_t>(it->length(0)));
            }
          } else if (!step.literal.empty()) {
            std::size_t pos = 0;
            while ((pos = piece.find(step.literal, pos)) != std::string::npos) {
              emit_match(pos, pos + step.literal.size());
              pos += step.literal.size();
            }
          }
          if (last < piece.size()) out.push_back(piece.substr(last));
        }
        return out;
      },
      p);
}

// ---------------------------------------------------------------------------
// Decoders (single-token rendering)

struct ByteLevelDec {};
struct MetaspaceDec {
  std::string replacement = "\xE2\x96\x81";
};
struct ByteFallbackDec {};
struct ReplaceDec {
  std::string literal;
  std::string content;
};
struct SuffixDec {
  std::string suffix;
};
using Decoder = std::variant<ByteLevelDec, MetaspaceDec, ByteFallbackDec, ReplaceDec, SuffixDec>;

std::string decode_with(const Decoder& d, const std::string& tok) {
  return std::visit(
      [&](const auto& step) -> std::string {
        using T = std::decay_t<decltype(step)>;
        if constexpr (std::is_same_v<T, ByteLevelDec>) {
          std::string out;
          for (char32_t c : utf8::decode(tok)) {
            auto it = byte_table().to_byte.find(c);
            if (it != byte_table().to_byte.end()) {
              out.push_back(static_cast<char>(it->second));
            } else {
              out += utf8::encode(c);
            }
          }
          return out;
        } else if constexpr (std::is_same_v<T, MetaspaceDec>) {
          return replace_all(tok, step.replacement, " ");
        } else if constexpr (std::is_same_v<T, ByteFallbackDec>) {
          if (auto b = parse_byte_token(tok)) return std::string(1, static_cast<char>(*b));
          return tok;
        } else if constexpr (std::is_same_v<T, ReplaceDec>) {
          return replace_all(tok, step.literal, step.content);
        } else {
          if (!step.suffix.empty() && tok.size() >= step.suffix.size() &&
              tok.compare(tok.size() - step.suffix.size(), step.suffix.size(), step.suffix) == 0) {
            return tok.substr(0, tok.size() - step.suffix.size()) + " ";
          }
          return tok;
        }
      },
      d);
}

// ---------------------------------------------------------------------------
// Models

struct WordLevelModel {
  std::optional<TokenId> unk;
};
struct WordPieceModel {
  std::optional<TokenId> unk;
  std::string prefix = "##";
  std::size_t max_chars = 100;
};
struct BpeModel {
  std::unordered_map<std::string, std::size_t> ranks;  // "a\0b" -> rank
  std::optional<TokenId> unk;
  std::string prefix;
  std::string suffix;
  bool fuse_unk = false;
  bool byte_fallback = false;
  bool ignore_merges = false;
};
struct UnigramModel {
  std::vector<double> scores;  // by id
  std::optional<TokenId> unk;
  bool byte_fallback = false;
  double min_score = 0.0;
  std::size_t max_piece_bytes = 1;
};
using Model = std::variant<WordLevelModel, WordPieceModel, BpeModel, UnigramModel>;

struct AddedToken {
  TokenId id;
  std::string content;
  bool special;
};

std::optional<std::regex> compile_pattern(const json& pattern, std::string& literal, bool& gpt_fallback) {
  if (pattern.contains("String")) {
    literal = pattern["String"].get<std::string>();
    return std::nullopt;
  }
  const std::string re = pattern.at("Regex").get<std::string>();
  if (re.find("\\p{") != std::string::npos || re.find("(?i:") != std::string::npos ||
      re.find("(?!") != std::string::npos) {
    gpt_fallback = true;
    return std::nullopt;
  }
  try {
    return std::regex(re, std::regex::ECMAScript);
  } catch (const std::regex_error&) {
    gpt_fallback = true;
    return std::nullopt;
  }
}

}  // namespace

struct HfTokenizer::Impl {
  std::string source;
  std::vector<std::optional<std::string>> id_to_token;
  std::unordered_map<std::string, TokenId> token_to_id;
  std::vector<AddedToken> added;  // sorted by content length, longest first
  std::vector<bool> is_added;
  std::vector<Normalizer> normalizers;
  std::vector<PreTokenizer> pretokenizers;
  std::vector<Decoder> decoders;
  Model model;

  std::optional<TokenId> lookup(const std::string& s) const {
    auto it = token_to_id.find(s);
    if (it == token_to_id.end()) return std::nullopt;
    return it->second;
  }

  void tokenize_word(const std::string& word, std::vector<TokenId>& out) const;
  void bpe(const BpeModel& m, const std::string& word, std::vector<TokenId>& out) const;
  void wordpiece(const WordPieceModel& m, const std::string& word, std::vector<TokenId>& out) const;
  void unigram(const UnigramModel& m, const std::string& word, std::vector<TokenId>& out) const;
};

void HfTokenizer::Impl::tokenize_word(const std::string& word, std::vector<TokenId>& out) const {
  if (word.empty()) return;
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, WordLevelModel>) {
          if (auto id = lookup(word)) {
            out.push_back(*id);
          } else {
            out.push_back(m.unk.value_or(kNoToken));
          }
        } else if constexpr (std::is_same_v<T, WordPieceModel>) {
          wordpiece(m, word, out);
        } else if constexpr (std::is_same_v<T, BpeModel>) {
          bpe(m, word, out);
        } else {
          unigram(m, word, out);
        }
      },
      model);
}

void HfTokenizer::Impl::wordpiece(const WordPieceModel& m, const std::string& word,
                                  std::vector<TokenId>& out) const {
  const auto pieces = utf8::chars(word);
  if (pieces.size() > m.max_chars) {
    out.push_back(m.unk.value_or(kNoToken));
    return;
  }
  std::vector<TokenId> sub;
  std::size_t start = 0;  // in chars
  while (start < pieces.size()) {
    std::size_t end = pieces.size();
    std::optional<TokenId> found;
    while (start < end) {
      std::string candidate;
      if (start > 0) candidate = m.prefix;
      for (std::size_t k = start; k < end; ++k) candidate += pieces[k];
      if ((found = lookup(candidate))) break;
      --end;
    }
    if (!found) {
      out.push_back(m.unk.value_or(kNoToken));
      return;
    }
    sub.push_back(*found);
    start = end;
  }
  out.insert(out.end(), sub.begin(), sub.end());
}

void HfTokenizer::Impl::bpe(const BpeModel& m, const std::string& word, std::vector<TokenId>& out) const {
  if (m.ignore_merges) {
    if (auto id = lookup(word)) {
      out.push_back(*id);
      return;
    }
  }
  const auto chars = utf8::chars(word);
  std::vector<std::string> symbols;
  symbols.reserve(chars.size());
  for (std::size_t i = 0; i < chars.size(); ++i) {
    std::string s(chars[i]);
    if (i > 0 && !m.prefix.empty()) s = m.prefix + s;
    if (i + 1 == chars.size() && !m.suffix.empty()) s += m.suffix;
    symbols.push_back(std::move(s));
  }
  for (;;) {
    std::size_t best_rank = std::numeric_limits<std::size_t>::max();
    std::size_t best_at = 0;
    for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
      std::string key = symbols[i];
      key.push_back('\0');
      key += symbols[i + 1];
      auto it = m.ranks.find(key);
      if (it != m.ranks.end() && it->second < best_rank) {
        best_rank = it->second;
        best_at = i;
      }
    }
    if (best_rank == std::numeric_limits<std::size_t>::max()) break;
    std::string merged = symbols[best_at];
    std::string right = symbols[best_at + 1];
    if (!m.prefix.empty() && right.rfind(m.prefix, 0) == 0) right = right.substr(m.prefix.size());
    merged += right;
    symbols[best_at] = std::move(merged);
    symbols.erase(symbols.begin() + static_cast<std::ptrdiff_t>(best_at) + 1);
  }
  bool last_unk = false;
  for (const auto& sym : symbols) {
    if (auto id = lookup(sym)) {
      out.push_back(*id);
      last_unk = false;
      continue;
    }
    if (m.byte_fallback) {
      bool all = true;
      std::vector<TokenId> bytes;
      for (unsigned char b : sym) {
        auto id = lookup(byte_token(b));
        if (!id) {
          all = false;
          break;
        }
        bytes.push_back(*id);
      }
      if (all) {
        out.insert(out.end(), bytes.begin(), bytes.end());
        last_unk = false;
        continue;
      }
    }
    if (!(m.fuse_unk && last_unk)) out.push_back(m.unk.value_or(kNoToken));
    last_unk = true;
  }
}

void HfTokenizer::Impl::unigram(const UnigramModel& m, const std::string& word,
                                std::vector<TokenId>& out) const {
  // Viterbi over char boundaries; unknown single chars cost min_score - 10.
  const auto chars = utf8::chars(word);
  const std::size_t n = chars.size();
  std::vector<std::size_t> offset(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) offset[i + 1] = offset[i] + chars[i].size();
  constexpr double kNeg = -std::numeric_limits<double>::infinity();
  std::vector<double> best(n + 1, kNeg);
  std::vector<std::size_t> from(n + 1, 0);
  std::vector<TokenId> via(n + 1, kNoToken);
  best[0] = 0.0;
  const double unk_score = m.min_score - 10.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (best[i] == kNeg) continue;
    bool single_char_known = false;
    for (std::size_t j = i + 1; j <= n && offset[j] - offset[i] <= m.max_piece_bytes; ++j) {
      const std::string piece = word.substr(offset[i], offset[j] - offset[i]);
      auto id = lookup(piece);
      if (!id || is_added[static_cast<std::size_t>(*id)]) continue;
      if (j == i + 1) single_char_known = true;
      const double s = best[i] + m.scores[static_cast<std::size_t>(*id)];
      if (s > best[j]) {
        best[j] = s;
        from[j] = i;
        via[j] = *id;
      }
    }
    if (!single_char_known) {
      const double s = best[i] + unk_score;
      if (s > best[i + 1]) {
        best[i + 1] = s;
        from[i + 1] = i;
        via[i + 1] = kNoToken;  // unknown char
      }
    }
  }
  std::vector<std::pair<std::size_t, TokenId>> path;  // (start char, id)
  for (std::size_t j = n; j > 0; j = from[j]) path.emplace_back(from[j], via[j]);
  std::reverse(path.begin(), path.end());
  bool last_unk = false;
  for (const auto& [start, id] : path) {
    if (id != kNoToken) {
      out.push_back(id);
      last_unk = false;
      continue;
    }
    if (m.byte_fallback) {
      for (unsigned char b : chars[start]) out.push_back(lookup(byte_token(b)).value_or(kNoToken));
      last_unk = false;
      continue;
    }
    if (!last_unk) out.push_back(m.unk.value_or(kNoToken));
    last_unk = true;
  }
}

namespace {

void parse_normalizer(const json& j, std::vector<Normalizer>& out) {
  if (j.is_null()) return;
  const std::string type = j.at("type").get<std::string>();
  if (type == "Sequence") {
    for (const auto& sub : j.at("normalizers")) parse_normalizer(sub, out);
  } else if (type == "Lowercase") {
    out.emplace_back(Lowercase{});
  } else if (type == "BertNormalizer") {
    BertNormalizer b;
    b.clean_text = j.value("clean_text", true);
    b.handle_chinese_chars = j.value("handle_chinese_chars", true);
    b.lowercase = j.value("lowercase", true);
    b.strip_accents = j.contains("strip_accents") && !j["strip_accents"].is_null()
                          ? j["strip_accents"].get<bool>()
                          : b.lowercase;
    out.emplace_back(b);
  } else if (type == "StripAccents") {
    out.emplace_back(StripAccents{});
  } else if (type == "Strip") {
    out.emplace_back(Strip{j.value("strip_left", true), j.value("strip_right", true)});
  } else if (type == "Replace") {
    ReplaceNorm r;
    bool unused = false;
    r.regex = compile_pattern(j.at("pattern"), r.literal, unused);
    r.content = j.at("content").get<std::string>();
    out.emplace_back(std::move(r));
  } else if (type == "Prepend") {
    out.emplace_back(Prepend{j.at("prepend").get<std::string>()});
  } else if (type == "NFC" || type == "NFD" || type == "NFKC" || type == "NFKD" ||
             type == "Precompiled" || type == "Nmt") {
    // identity
  } else {
    throw ConfigError("unsupported normalizer: " + type);
  }
}

void parse_pretokenizer(const json& j, std::vector<PreTokenizer>& out) {
  if (j.is_null()) return;
  const std::string type = j.at("type").get<std::string>();
  if (type == "Sequence") {
    for (const auto& sub : j.at("pretokenizers")) parse_pretokenizer(sub, out);
  } else if (type == "Whitespace") {
    out.emplace_back(WhitespacePre{});
  } else if (type == "WhitespaceSplit") {
    out.emplace_back(WhitespaceSplitPre{});
  } else if (type == "BertPreTokenizer") {
    out.emplace_back(BertPre{});
  } else if (type == "Punctuation") {
    out.emplace_back(PunctuationPre{j.value("behavior", std::string("Isolated")) == "Contiguous"});
  } else if (type == "Digits") {
    out.emplace_back(DigitsPre{j.value("individual_digits", false)});
  } else if (type == "Metaspace") {
    MetaspacePre m;
    m.replacement = j.value("replacement", m.replacement);
    m.split = j.value("split", true);
    if (j.contains("prepend_scheme")) {
      const auto s = j["prepend_scheme"].get<std::string>();
      m.scheme = s == "never" ? MetaspacePre::Scheme::Never
                 : s == "first" ? MetaspacePre::Scheme::First
                                : MetaspacePre::Scheme::Always;
    } else if (!j.value("add_prefix_space", true)) {
      m.scheme = MetaspacePre::Scheme::Never;
    }
    out.emplace_back(std::move(m));
  } else if (type == "ByteLevel") {
    out.emplace_back(ByteLevelPre{j.value("add_prefix_space", false), j.value("use_regex", true)});
  } else if (type == "Split") {
    SplitPre s;
    s.regex = compile_pattern(j.at("pattern"), s.literal, s.gpt_fallback);
    s.removed = j.value("behavior", std::string("Isolated")) == "Removed";
    out.emplace_back(std::move(s));
  } else {
    throw ConfigError("unsupported pre_tokenizer: " + type);
  }
}

void parse_decoder(const json& j, std::vector<Decoder>& out) {
  if (j.is_null()) return;
  const std::string type = j.at("type").get<std::string>();
  if (type == "Sequence") {
    for (const auto& sub : j.at("decoders")) parse_decoder(sub, out);
  } else if (type == "ByteLevel") {
    out.emplace_back(ByteLevelDec{});
  } else if (type == "Metaspace") {
    out.emplace_back(MetaspaceDec{j.value("replacement", std::string("\xE2\x96\x81"))});
  } else if (type == "ByteFallback") {
    out.emplace_back(ByteFallbackDec{});
  } else if (type == "Replace") {
    ReplaceDec r;
    const auto& p = j.at("pattern");
    if (!p.contains("String")) throw ConfigError("Replace decoder supports String patterns only");
    r.literal = p["String"].get<std::string>();
    r.content = j.at("content").get<std::string>();
    out.emplace_back(std::move(r));
  } else if (type == "BPEDecoder") {
    out.emplace_back(SuffixDec{j.value("suffix", std::string("</w>"))});
  } else if (type == "WordPiece" || type == "Fuse" || type == "Strip" || type == "CTC") {
    // Single-token rendering is unaffected (Strip is deliberately not applied).
  } else {
    throw ConfigError("unsupported decoder: " + type);
  }
}

std::optional<TokenId> unk_id(const json& model, const HfTokenizer::Impl& impl) {
  if (!model.contains("unk_token") || model["unk_token"].is_null()) return std::nullopt;
  return impl.lookup(model["unk_token"].get<std::string>());
}

}  // namespace

HfTokenizer HfTokenizer::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open tokenizer file: " + path);
  json def;
  try {
    def = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("tokenizer file is not valid JSON: " + path + ": " + e.what());
  }
  return from_json(def, path);
}

HfTokenizer HfTokenizer::from_json(const json& def, std::string source) {
  auto impl = std::make_shared<Impl>();
  impl->source = std::move(source);
  try {
    const json& model = def.at("model");
    std::string type = model.value("type", std::string());
    if (type.empty()) {
      // Older files omit the type; infer from shape.
      if (model.contains("merges")) type = "BPE";
      else if (model.at("vocab").is_array()) type = "Unigram";
      else if (model.contains("continuing_subword_prefix")) type = "WordPiece";
      else type = "WordLevel";
    }

    auto put = [&](TokenId id, const std::string& tok) {
      if (id < 0) throw ConfigError("negative token id in vocabulary");
      const auto idx = static_cast<std::size_t>(id);
      if (impl->id_to_token.size() <= idx) impl->id_to_token.resize(idx + 1);
      impl->id_to_token[idx] = tok;
      impl->token_to_id.emplace(tok, id);
    };

    std::vector<double> unigram_scores;
    if (type == "Unigram") {
      TokenId id = 0;
      for (const auto& entry : model.at("vocab")) {
        put(id, entry.at(0).get<std::string>());
        unigram_scores.push_back(entry.at(1).get<double>());
        ++id;
      }
    } else {
      for (const auto& [tok, id] : model.at("vocab").items()) put(id.get<TokenId>(), tok);
    }

    if (def.contains("added_tokens")) {
      for (const auto& a : def["added_tokens"]) {
        AddedToken t{a.at("id").get<TokenId>(), a.at("content").get<std::string>(),
                     a.value("special", false)};
        const auto idx = static_cast<std::size_t>(t.id);
        if (impl->id_to_token.size() <= idx || !impl->id_to_token[idx]) put(t.id, t.content);
        impl->token_to_id[t.content] = t.id;
        impl->added.push_back(std::move(t));
      }
    }
    std::stable_sort(impl->added.begin(), impl->added.end(),
                     [](const AddedToken& a, const AddedToken& b) { return a.content.size() > b.content.size(); });
    impl->is_added.assign(impl->id_to_token.size(), false);
    for (const auto& a : impl->added) impl->is_added[static_cast<std::size_t>(a.id)] = true;

    if (type == "WordLevel") {
      impl->model = WordLevelModel{unk_id(model, *impl)};
    } else if (type == "WordPiece") {
      WordPieceModel m;
      m.unk = unk_id(model, *impl);
      m.prefix = model.value("continuing_subword_prefix", std::string("##"));
      m.max_chars = model.value("max_input_chars_per_word", std::size_t{100});
      impl->model = std::move(m);
    } else if (type == "BPE") {
      BpeModel m;
      m.unk = unk_id(model, *impl);
      auto str_or_empty = [&](const char* key) {
        return model.contains(key) && model[key].is_string() ? model[key].get<std::string>() : std::string();
      };
      m.prefix = str_or_empty("continuing_subword_prefix");
      m.suffix = str_or_empty("end_of_word_suffix");
      m.fuse_unk = model.value("fuse_unk", false);
      m.byte_fallback = model.value("byte_fallback", false);
      m.ignore_merges = model.value("ignore_merges", false);
      std::size_t rank = 0;
      for (const auto& merge : model.at("merges")) {
        std::string a, b;
        if (merge.is_string()) {
          const auto s = merge.get<std::string>();
          const auto sp = s.find(' ');
          if (sp == std::string::npos) throw ConfigError("malformed merge: " + s);
          a = s.substr(0, sp);
          b = s.substr(sp + 1);
        } else {
          a = merge.at(0).get<std::string>();
          b = merge.at(1).get<std::string>();
        }
        std::string key = a;
        key.push_back('\0');
        key += b;
        m.ranks.emplace(std::move(key), rank++);
      }
      impl->model = std::move(m);
    } else if (type == "Unigram") {
      UnigramModel m;
      m.scores = std::move(unigram_scores);
      m.scores.resize(impl->id_to_token.size(), 0.0);
      if (model.contains("unk_id") && !model["unk_id"].is_null()) m.unk = model["unk_id"].get<TokenId>();
      m.byte_fallback = model.value("byte_fallback", false);
      m.min_score = m.scores.empty() ? 0.0 : *std::min_element(m.scores.begin(), m.scores.end());
      for (const auto& t : impl->id_to_token) {
        if (t) m.max_piece_bytes = std::max(m.max_piece_bytes, t->size());
      }
      impl->model = std::move(m);
    } else {
      throw ConfigError("unsupported tokenizer model: " + type);
    }

    parse_normalizer(def.value("normalizer", json()), impl->normalizers);
    parse_pretokenizer(def.value("pre_tokenizer", json()), impl->pretokenizers);
    parse_decoder(def.value("decoder", json()), impl->decoders);
  } catch (const json::exception& e) {
    throw ConfigError("malformed tokenizer definition (" + impl->source + "): " + e.what());
  }
  return HfTokenizer(std::move(impl));
}

std::size_t HfTokenizer::vocab_size() const { return impl_->id_to_token.size(); }

std::optional<std::string> HfTokenizer::token_string(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= impl_->id_to_token.size()) return std::nullopt;
  return impl_->id_to_token[static_cast<std::size_t>(id)];
}

std::optional<std::string> HfTokenizer::decode_bytes(TokenId id) const {
  auto tok = token_string(id);
  if (!tok) return std::nullopt;
  if (impl_->is_added[static_cast<std::size_t>(id)]) return tok;
  std::string s = *tok;
  for (const auto& d : impl_->decoders) s = decode_with(d, s);
  return s;
}

std::vector<TokenId> HfTokenizer::encode(std::string_view text) const {
  const Impl& m = *impl_;
  std::vector<TokenId> out;
  // Split around added tokens (longest match wins at each position).
  std::size_t seg_start = 0;
  std::size_t i = 0;
  bool first_segment = true;
  auto flush = [&](std::size_t end) {
    if (end <= seg_start) return;
    std::string s(text.substr(seg_start, end - seg_start));
    for (const auto& n : m.normalizers) s = normalize_with(n, s);
    std::vector<std::string> pieces{s};
    for (const auto& p : m.pretokenizers) {
      std::vector<std::string> next;
      for (const auto& piece : pieces) {
        auto parts = pre_tokenize_with(p, piece, first_segment);
        next.insert(next.end(), std::make_move_iterator(parts.begin()), std::make_move_iterator(parts.end()));
      }
      pieces = std::move(next);
    }
    for (const auto& piece : pieces) m.tokenize_word(piece, out);
    first_segment = false;
  };
  while (i < text.size()) {
    const AddedToken* hit = nullptr;
    for (const auto& a : m.added) {
      if (!a.content.empty() && text.compare(i, a.content.size(), a.content) == 0) {
        hit = &a;
        break;
      }
    }
    if (!hit) {
      ++i;
      continue;
    }
    flush(i);
    out.push_back(hit->id);
    i += hit->content.size();
    seg_start = i;
    first_segment = false;
  }
  flush(text.size());
  return out;
}

std::vector<TokenId> HfTokenizer::declared_specials() const {
  std::vector<TokenId> ids;
  for (const auto& a : impl_->added) {
    if (a.special) ids.push_back(a.id);
  }
  return ids;
}

std::string HfTokenizer::source() const { return impl_->source; }

}  // namespace sticky
