#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mtlqa::text {

// Character offsets throughout the project count Unicode scalar values
// (code points), not bytes. These helpers keep that bookkeeping in one place.

bool valid_utf8(const std::string& s);

// Number of code points in a valid UTF-8 string.
std::size_t cp_length(const std::string& s);

// Byte offset of the code point with index cp (cp may equal cp_length).
std::size_t byte_of_cp(const std::string& s, std::size_t cp);

// Substring by half-open code-point range [cp_start, cp_end).
std::string cp_substr(const std::string& s, std::size_t cp_start, std::size_t cp_end);

// Decoded code points plus the byte offset where each starts.
struct DecodedText {
    std::vector<char32_t> cps;
    std::vector<std::size_t> byte_starts;
};
DecodedText decode_utf8(const std::string& s);

inline bool is_ascii_alnum(char32_t c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}
inline bool is_ascii_space(char32_t c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}
// Treat non-ASCII code points as word characters; only ASCII punctuation splits.
inline bool is_word_char(char32_t c) {
    return is_ascii_alnum(c) || c >= 128;
}
inline char32_t ascii_lower(char32_t c) {
    return (c >= 'A' && c <= 'Z') ? c + 32 : c;
}

std::string ascii_lower(const std::string& s);

// Lowercase, trim, and collapse internal whitespace runs to single spaces.
std::string normalize_term(const std::string& s);

std::string encode_utf8(const std::vector<char32_t>& cps);

}  // namespace mtlqa::text
