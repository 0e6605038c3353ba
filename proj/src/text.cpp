#include "mtlqa/text.hpp"

#include <stdexcept>

namespace mtlqa::text {

namespace {

// Decodes one code point starting at byte i; returns false on malformed input.
bool decode_one(const std::string& s, std::size_t i, char32_t* out, std::size_t* len) {
    unsigned char b0 = static_cast<unsigned char>(s[i]);
    if (b0 < 0x80) {
        *out = b0;
        *len = 1;
        return true;
    }
    int n;
    char32_t cp;
    if ((b0 & 0xE0) == 0xC0) {
        n = 2;
        cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        n = 3;
        cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        n = 4;
        cp = b0 & 0x07;
    } else {
        return false;
    }
    if (i + n > s.size()) return false;
    for (int k = 1; k < n; ++k) {
        unsigned char b = static_cast<unsigned char>(s[i + k]);
        if ((b & 0xC0) != 0x80) return false;
        cp = (cp << 6) | (b & 0x3F);
    }
    // Reject overlong encodings and surrogates.
    if ((n == 2 && cp < 0x80) || (n == 3 && cp < 0x800) || (n == 4 && cp < 0x10000)) return false;
    if (cp >= 0xD800 && cp <= 0xDFFF) return false;
    if (cp > 0x10FFFF) return false;
    *out = cp;
    *len = n;
    return true;
}

}  // namespace

bool valid_utf8(const std::string& s) {
    std::size_t i = 0;
    while (i < s.size()) {
        char32_t cp;
        std::size_t len;
        if (!decode_one(s, i, &cp, &len)) return false;
        i += len;
    }
    return true;
}

DecodedText decode_utf8(const std::string& s) {
    DecodedText d;
    d.cps.reserve(s.size());
    d.byte_starts.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        char32_t cp;
        std::size_t len;
        if (!decode_one(s, i, &cp, &len)) {
            throw std::runtime_error("invalid UTF-8 at byte " + std::to_string(i));
        }
        d.cps.push_back(cp);
        d.byte_starts.push_back(i);
        i += len;
    }
    return d;
}

std::size_t cp_length(const std::string& s) {
    std::size_t i = 0, count = 0;
    while (i < s.size()) {
        char32_t cp;
        std::size_t len;
        if (!decode_one(s, i, &cp, &len)) {
            throw std::runtime_error("invalid UTF-8 at byte " + std::to_string(i));
        }
        i += len;
        ++count;
    }
    return count;
}

std::size_t byte_of_cp(const std::string& s, std::size_t cp) {
    std::size_t i = 0, count = 0;
    while (i < s.size() && count < cp) {
        char32_t c;
        std::size_t len;
        if (!decode_one(s, i, &c, &len)) {
            throw std::runtime_error("invalid UTF-8 at byte " + std::to_string(i));
        }
        i += len;
        ++count;
    }
    if (count < cp) throw std::out_of_range("code point index past end of string");
    return i;
}

std::string cp_substr(const std::string& s, std::size_t cp_start, std::size_t cp_end) {
    if (cp_end < cp_start) throw std::out_of_range("cp_substr: end before start");
    std::size_t b0 = byte_of_cp(s, cp_start);
    std::size_t b1 = byte_of_cp(s, cp_end);
    return s.substr(b0, b1 - b0);
}

std::string ascii_lower(const std::string& s) {
    std::string out = s;
    for (char& c : out) {
        if (c >= 'A' && c <= 'Z') c += 32;
    }
    return out;
}

std::string normalize_term(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    for (char c : s) {
        unsigned char u = static_cast<unsigned char>(c);
        if (u < 128 && is_ascii_space(u)) {
            if (!out.empty()) pending_space = true;
            continue;
        }
        if (pending_space) {
            out += ' ';
            pending_space = false;
        }
        out += (c >= 'A' && c <= 'Z') ? static_cast<char>(c + 32) : c;
    }
    return out;
}

std::string encode_utf8(const std::vector<char32_t>& cps) {
    std::string out;
    out.reserve(cps.size());
    for (char32_t cp : cps) {
        if (cp < 0x80) {
            out += static_cast<char>(cp);
        } else if (cp < 0x800) {
            out += static_cast<char>(0xC0 | (cp >> 6));
            out += static_cast<char>(0x80 | (cp & 0x3F));
        } else if (cp < 0x10000) {
            out += static_cast<char>(0xE0 | (cp >> 12));
            out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
            out += static_cast<char>(0x80 | (cp & 0x3F));
        } else {
            out += static_cast<char>(0xF0 | (cp >> 18));
            out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
            out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
            out += static_cast<char>(0x80 | (cp & 0x3F));
        }
    }
    return out;
}

}  // namespace mtlqa::text
