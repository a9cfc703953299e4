#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace censusflow::utf8 {

// Invalid sequences decode to U+FFFD, one replacement per offending byte.
std::u32string decode(std::string_view text);
std::string encode(std::u32string_view text);
std::string encode(char32_t cp);

// Number of code points, counted the same way decode() does.
std::size_t length(std::string_view text);

}  // namespace censusflow::utf8
