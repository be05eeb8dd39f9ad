#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace finetype {

// Decodes UTF-8 into codepoints. Corpus strings arrive through the JSON
// parser, which already rejects invalid byte sequences, so a decode failure
// here means a malformed side input and raises format_error.
std::vector<std::uint32_t> utf8_decode(const std::string& s);

std::string utf8_encode(std::uint32_t cp);

// ASCII-only lowercasing; non-ASCII bytes pass through untouched.
std::string ascii_lower(std::string s);

}  // namespace finetype
