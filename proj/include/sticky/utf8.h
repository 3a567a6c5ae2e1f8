#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace sticky::utf8 {

// Byte-level validity using the four lead/continuation ranges:
//   1 byte  [00-7F]
//   2 bytes [C2-DF][80-BF]
//   3 bytes [E0-EF][80-BF]{2}
//   4 bytes [F0-F4][80-BF]{3}
// Anything else (stray continuation bytes, truncated sequences, C0/C1/F5+
// leads) is invalid.
bool is_valid(std::string_view bytes);

// Decodes a valid sequence into code points. Invalid bytes map to U+FFFD.
std::u32string decode(std::string_view bytes);
std::string encode(char32_t cp);
std::string encode(std::u32string_view cps);

// Splits into per-character byte slices (lenient on invalid input).
std::vector<std::string_view> chars(std::string_view bytes);

// Character classes. Exact for ASCII and Latin-1; coarse range tables beyond
// that (no ICU dependency).
bool is_whitespace(char32_t c);
bool is_control(char32_t c);
bool is_punctuation(char32_t c);
bool is_digit(char32_t c);
bool is_cjk(char32_t c);
bool is_letter(char32_t c);
char32_t to_lower(char32_t c);
char32_t strip_accent(char32_t c);

std::string trim(std::string_view s);
std::vector<std::string> split_whitespace(std::string_view s);

}  // namespace sticky::utf8
