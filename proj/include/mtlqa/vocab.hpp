#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mtlqa {

// Subword vocabulary with fixed reserved ids and "##" continuation pieces.
class Vocabulary {
public:
    static constexpr int kPadId = 0;
    static constexpr int kUnkId = 1;
    static constexpr int kClsId = 2;
    static constexpr int kSepId = 3;
    static constexpr const char* kPad = "[PAD]";
    static constexpr const char* kUnk = "[UNK]";
    static constexpr const char* kCls = "[CLS]";
    static constexpr const char* kSep = "[SEP]";

    // Reserved tokens only.
    Vocabulary();

    // From an explicit ordered token list (reserved tokens included, at their
    // fixed positions). Rejects duplicates and misplaced reserved tokens.
    static Vocabulary from_tokens(std::vector<std::string> tokens);

    // Greedy frequency inventory over lowercased word tokens: whole words with
    // frequency >= min_freq plus single-character pieces so that any word made
    // of seen characters stays encodable without [UNK].
    static Vocabulary build(const std::vector<std::string>& corpus_texts, std::size_t max_size,
                            std::size_t min_freq);

    static Vocabulary load(const std::string& path);  // one token per line
    void save(const std::string& path) const;

    std::size_t size() const { return tokens_.size(); }
    const std::string& token(int id) const { return tokens_[id]; }
    const std::vector<std::string>& tokens() const { return tokens_; }
    std::optional<int> id_of(const std::string& token) const;
    bool contains(const std::string& token) const { return id_of(token).has_value(); }

    // FNV-1a over tokens; stored in checkpoints to detect vocab mismatches.
    std::uint64_t fingerprint() const;

private:
    std::vector<std::string> tokens_;
    std::map<std::string, int> ids_;
};

// Greedy longest-prefix-first decomposition of a single whitespace-free word.
// Unseen material collapses to ["[UNK]"].
std::vector<std::string> wordpiece_tokenize(const std::string& word, const Vocabulary& v);

// Pre-tokenization shared by vocabulary building and pair encoding: lowercased
// words (runs of word characters) and single ASCII punctuation tokens, with
// code-point offsets into the source text.
struct PreToken {
    std::string token;       // lowercased
    std::size_t cp_start = 0;
    std::size_t cp_end = 0;
};
std::vector<PreToken> pre_tokenize(const std::string& txt);

}  // namespace mtlqa
