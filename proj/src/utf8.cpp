#include "sticky/utf8.h"

#include <array>
#include <cstdint>

namespace sticky::utf8 {

namespace {

bool in(unsigned char b, unsigned char lo, unsigned char hi) { return b >= lo && b <= hi; }

// Length of the sequence starting at s[i] if it is valid under the range
// rules, otherwise 0.
std::size_t valid_length(std::string_view s, std::size_t i) {
  const auto b = static_cast<unsigned char>(s[i]);
  std::size_t len = 0;
  if (b <= 0x7F) return 1;
  if (in(b, 0xC2, 0xDF)) len = 2;
  else if (in(b, 0xE0, 0xEF)) len = 3;
  else if (in(b, 0xF0, 0xF4)) len = 4;
  else return 0;
  if (i + len > s.size()) return 0;
  for (std::size_t k = 1; k < len; ++k) {
    if (!in(static_cast<unsigned char>(s[i + k]), 0x80, 0xBF)) return 0;
  }
  return len;
}

}  // namespace

bool is_valid(std::string_view bytes) {
  std::size_t i = 0;
  while (i < bytes.size()) {
    const std::size_t len = valid_length(bytes, i);
    if (len == 0) return false;
    i += len;
  }
  return true;
}

std::u32string decode(std::string_view bytes) {
  std::u32string out;
  out.reserve(bytes.size());
  std::size_t i = 0;
  while (i < bytes.size()) {
    const std::size_t len = valid_length(bytes, i);
    if (len == 0) {
      out.push_back(U'�');
      ++i;
      continue;
    }
    const auto b0 = static_cast<unsigned char>(bytes[i]);
    char32_t cp = 0;
    switch (len) {
      case 1: cp = b0; break;
      case 2: cp = b0 & 0x1F; break;
      case 3: cp = b0 & 0x0F; break;
      default: cp = b0 & 0x07; break;
    }
    for (std::size_t k = 1; k < len; ++k) {
      cp = (cp << 6) | (static_cast<unsigned char>(bytes[i + k]) & 0x3F);
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

std::string encode(char32_t cp) {
  std::string out;
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
  return out;
}

std::string encode(std::u32string_view cps) {
  std::string out;
  out.reserve(cps.size());
  for (char32_t c : cps) out += encode(c);
  return out;
}

std::vector<std::string_view> chars(std::string_view bytes) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < bytes.size()) {
    std::size_t len = valid_length(bytes, i);
    if (len == 0) len = 1;
    out.push_back(bytes.substr(i, len));
    i += len;
  }
  return out;
}

bool is_whitespace(char32_t c) {
  switch (c) {
    case U' ': case U'\t': case U'\n': case U'\r': case U'\v': case U'\f':
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return c >= 0x2000 && c <= 0x200A;
  }
}

bool is_control(char32_t c) {
  if (c == U'\t' || c == U'\n' || c == U'\r') return false;
  return c < 0x20 || (c >= 0x7F && c < 0xA0);
}

bool is_punctuation(char32_t c) {
  if ((c >= 33 && c <= 47) || (c >= 58 && c <= 64) || (c >= 91 && c <= 96) ||
      (c >= 123 && c <= 126)) {
    return true;
  }
  switch (c) {
    case 0xA1: case 0xA7: case 0xAB: case 0xB6: case 0xB7: case 0xBB: case 0xBF:
      return true;
    default:
      break;
  }
  return (c >= 0x2010 && c <= 0x2027) || (c >= 0x2030 && c <= 0x205E) ||
         (c >= 0x3001 && c <= 0x3003) || (c >= 0x3008 && c <= 0x3011) ||
         (c >= 0x3014 && c <= 0x301F) || (c >= 0xFF01 && c <= 0xFF0F) ||
         (c >= 0xFF1A && c <= 0xFF20) || (c >= 0xFF3B && c <= 0xFF40) ||
         (c >= 0xFF5B && c <= 0xFF65) || c == 0x37E || c == 0x387 ||
         (c >= 0x55A && c <= 0x55F) || c == 0x589 || c == 0x5BE || c == 0x5C0 ||
         c == 0x5C3 || c == 0x5C6 || c == 0x5F3 || c == 0x5F4 || c == 0x60C ||
         c == 0x60D || c == 0x61B || c == 0x61F || (c >= 0x66A && c <= 0x66D) ||
         c == 0x6D4 || c == 0x964 || c == 0x965 || c == 0xE4F;
}

bool is_digit(char32_t c) {
  return (c >= U'0' && c <= U'9') || (c >= 0x660 && c <= 0x669) ||
         (c >= 0x6F0 && c <= 0x6F9) || (c >= 0x966 && c <= 0x96F) ||
         (c >= 0xFF10 && c <= 0xFF19) || c == 0xB2 || c == 0xB3 || c == 0xB9 ||
         (c >= 0xBC && c <= 0xBE);
}

bool is_cjk(char32_t c) {
  return (c >= 0x4E00 && c <= 0x9FFF) || (c >= 0x3400 && c <= 0x4DBF) ||
         (c >= 0x20000 && c <= 0x2A6DF) || (c >= 0x2A700 && c <= 0x2B73F) ||
         (c >= 0x2B740 && c <= 0x2B81F) || (c >= 0x2B820 && c <= 0x2CEAF) ||
         (c >= 0xF900 && c <= 0xFAFF) || (c >= 0x2F800 && c <= 0x2FA1F);
}

bool is_letter(char32_t c) {
  if (c < 0x80) return (c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z');
  if (c == 0xAA || c == 0xB5 || c == 0xBA) return true;
  if (c < 0xC0) return false;
  if (c == 0xD7 || c == 0xF7) return false;
  if (c >= 0x2000 && c <= 0x2BFF) return false;  // punctuation, symbols, arrows, math
  if (c >= 0x300 && c <= 0x36F) return false;    // combining marks
  return !is_whitespace(c) && !is_punctuation(c) && !is_digit(c) && !is_control(c) &&
         c != 0xFFFD;
}

char32_t to_lower(char32_t c) {
  if (c >= U'A' && c <= U'Z') return c + 32;
  if ((c >= 0xC0 && c <= 0xDE) && c != 0xD7) return c + 32;
  if (c >= 0x391 && c <= 0x3A9 && c != 0x3A2) return c + 32;  // Greek
  if (c >= 0x410 && c <= 0x42F) return c + 32;                 // Cyrillic
  if (c >= 0x400 && c <= 0x40F) return c + 80;
  if (c >= 0x100 && c <= 0x17F && c != 0x130 && c != 0x138 && c != 0x149 &&
      c != 0x17F) {
    // Latin Extended-A alternates upper/lower, with a parity shift at 0x139..0x148
    // and 0x179..0x17E.
    const bool odd_block = (c >= 0x139 && c <= 0x148) || (c >= 0x179 && c <= 0x17E);
    const bool is_upper = odd_block ? (c % 2 == 1) : (c % 2 == 0);
    return is_upper ? c + 1 : c;
  }
  return c;
}

char32_t strip_accent(char32_t c) {
  // Latin-1 Supplement letters -> base letter (what NFD + drop marks gives).
  static constexpr std::array<char32_t, 64> kTable = {
      U'A', U'A', U'A', U'A', U'A', U'A', 0xC6, U'C',  // C0-C7
      U'E', U'E', U'E', U'E', U'I', U'I', U'I', U'I',  // C8-CF
      0xD0, U'N', U'O', U'O', U'O', U'O', U'O', 0xD7,  // D0-D7
      0xD8, U'U', U'U', U'U', U'U', U'Y', 0xDE, 0xDF,  // D8-DF
      U'a', U'a', U'a', U'a', U'a', U'a', 0xE6, U'c',  // E0-E7
      U'e', U'e', U'e', U'e', U'i', U'i', U'i', U'i',  // E8-EF
      0xF0, U'n', U'o', U'o', U'o', U'o', U'o', 0xF7,  // F0-F7
      0xF8, U'u', U'u', U'u', U'u', U'y', 0xFE, U'y',  // F8-FF
  };
  if (c >= 0xC0 && c <= 0xFF) return kTable[c - 0xC0];
  return c;
}

std::string trim(std::string_view s) {
  const char* ws = " \t\n\r\v\f";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_whitespace(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
  };
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    const std::size_t start = i;
    while (i < s.size() && !is_space(s[i])) ++i;
    if (i > start) out.emplace_back(s.substr(start, i - start));
  }
  return out;
}

}  // namespace sticky::utf8
