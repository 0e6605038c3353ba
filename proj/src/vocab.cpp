#include "mtlqa/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <stdexcept>

#include "mtlqa/text.hpp"

namespace mtlqa {

Vocabulary::Vocabulary() {
    tokens_ = {kPad, kUnk, kCls, kSep};
    for (std::size_t i = 0; i < tokens_.size(); ++i) ids_[tokens_[i]] = static_cast<int>(i);
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens) {
    Vocabulary v;
    if (tokens.size() < 4 || tokens[0] != kPad || tokens[1] != kUnk || tokens[2] != kCls ||
        tokens[3] != kSep) {
        throw std::invalid_argument(
            "vocabulary must start with [PAD], [UNK], [CLS], [SEP] at ids 0..3");
    }
    v.tokens_.clear();
    v.ids_.clear();
    for (auto& t : tokens) {
        if (t.empty()) throw std::invalid_argument("vocabulary contains an empty token");
        if (!v.ids_.emplace(t, static_cast<int>(v.tokens_.size())).second) {
            throw std::invalid_argument("duplicate vocabulary token: \"" + t + "\"");
        }
        v.tokens_.push_back(std::move(t));
    }
    return v;
}

std::optional<int> Vocabulary::id_of(const std::string& token) const {
    auto it = ids_.find(token);
    if (it == ids_.end()) return std::nullopt;
    return it->second;
}

std::vector<PreToken> pre_tokenize(const std::string& txt) {
    std::vector<PreToken> out;
    const text::DecodedText d = text::decode_utf8(txt);
    const std::size_t n = d.cps.size();
    std::size_t i = 0;
    while (i < n) {
        const char32_t c = d.cps[i];
        if (text::is_ascii_space(c)) {
            ++i;
            continue;
        }
        PreToken t;
        t.cp_start = i;
        if (text::is_word_char(c)) {
            std::vector<char32_t> word;
            while (i < n && text::is_word_char(d.cps[i])) {
                word.push_back(text::ascii_lower(d.cps[i]));
                ++i;
            }
            t.token = text::encode_utf8(word);
        } else {
            // Each ASCII punctuation character stands alone.
            t.token = text::encode_utf8({c});
            ++i;
        }
        t.cp_end = i;
        out.push_back(std::move(t));
    }
    return out;
}

Vocabulary Vocabulary::build(const std::vector<std::string>& corpus_texts, std::size_t max_size,
                             std::size_t min_freq) {
    if (max_size < 5) throw std::invalid_argument("vocabulary max_size must be at least 5");

    std::map<std::string, std::size_t> word_freq;
    std::set<char32_t> chars;
    for (const auto& txt : corpus_texts) {
        for (const auto& t : pre_tokenize(txt)) {
            word_freq[t.token] += 1;
            for (char32_t c : text::decode_utf8(t.token).cps) chars.insert(c);
        }
    }

    // Words with ids before character pieces, as listed; capacity for the
    // character pieces is reserved up front so single-character fallback
    // encoding survives any max_size.
    std::size_t char_slots = 0;
    std::vector<std::string> char_pieces;
    for (char32_t c : chars) {
        const std::string s = text::encode_utf8({c});
        char_pieces.push_back(s);
        char_pieces.push_back("##" + s);
    }
    char_slots = char_pieces.size();

    std::vector<std::pair<std::string, std::size_t>> words(word_freq.begin(), word_freq.end());
    std::stable_sort(words.begin(), words.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    std::vector<std::string> tokens = {kPad, kUnk, kCls, kSep};
    std::set<std::string> present(tokens.begin(), tokens.end());
    const std::size_t word_budget =
        max_size > tokens.size() + char_slots ? max_size - tokens.size() - char_slots : 0;
    std::size_t taken = 0;
    for (const auto& [w, freq] : words) {
        if (freq < min_freq || taken >= word_budget) break;
        if (present.insert(w).second) {
            tokens.push_back(w);
            ++taken;
        }
    }
    for (const auto& p : char_pieces) {
        if (tokens.size() >= max_size) break;
        if (present.insert(p).second) tokens.push_back(p);
    }
    return from_tokens(std::move(tokens));
}

Vocabulary Vocabulary::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open vocabulary file: " + path);
    std::vector<std::string> tokens;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        tokens.push_back(line);
    }
    try {
        return from_tokens(std::move(tokens));
    } catch (const std::exception& ex) {
        throw std::runtime_error(path + ": " + ex.what());
    }
}

void Vocabulary::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write vocabulary file: " + path);
    for (const auto& t : tokens_) out << t << '\n';
}

std::uint64_t Vocabulary::fingerprint() const {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&](unsigned char b) {
        h ^= b;
        h *= 1099511628211ULL;
    };
    for (const auto& t : tokens_) {
        for (char c : t) mix(static_cast<unsigned char>(c));
        mix('\n');
    }
    return h;
}

std::vector<std::string> wordpiece_tokenize(const std::string& word, const Vocabulary& v) {
    if (word.empty()) throw std::invalid_argument("wordpiece_tokenize: empty word");
    const text::DecodedText d = text::decode_utf8(word);
    const std::size_t n = d.cps.size();
    std::vector<std::string> pieces;
    std::size_t start = 0;
    while (start < n) {
        std::size_t end = n;
        std::string found;
        while (end > start) {
            std::string sub = text::encode_utf8({d.cps.begin() + start, d.cps.begin() + end});
            if (start > 0) sub = "##" + sub;
            if (v.contains(sub)) {
                found = std::move(sub);
                break;
            }
            --end;
        }
        if (found.empty()) return {Vocabulary::kUnk};
        pieces.push_back(std::move(found));
        start = end;
    }
    return pieces;
}

}  // namespace mtlqa
