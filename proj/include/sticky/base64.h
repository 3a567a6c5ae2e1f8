#pragma once

#include <string>
#include <string_view>

namespace sticky::base64 {

std::string encode(std::string_view bytes);
// Throws DataError on malformed input.
std::string decode(std::string_view text);

}  // namespace sticky::base64
