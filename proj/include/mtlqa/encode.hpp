#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mtlqa/record.hpp"
#include "mtlqa/vocab.hpp"

namespace mtlqa {

// Inclusive token span (start_tok, end_tok).
struct TokenSpan {
    int start = 0;
    int end = 0;
};

// Packed `[CLS] Q [SEP] C [SEP]` sequence, padded to max_seq_len.
// offsets[i] is the half-open code-point range of context characters covered
// by token i; it is present exactly for non-special context tokens.
struct TokenizedPair {
    std::vector<int> ids;
    std::vector<int> segment_ids;                                 // 0 question side, 1 context side
    std::vector<std::uint8_t> attention;                          // 1 real, 0 pad
    std::vector<std::optional<std::pair<std::size_t, std::size_t>>> offsets;
    std::optional<TokenSpan> gold_span;
    bool truncated = false;
    int n_real = 0;  // count of non-pad positions

    int seq_len() const { return static_cast<int>(ids.size()); }
};

// Table-style packing; context is right-truncated when overlong, the question
// never is (an overlong question is an error).
TokenizedPair encode_pair(const std::string& question, const std::string& context,
                          const Vocabulary& v, int max_seq_len);

// Minimal token window whose character coverage contains the (whitespace-
// trimmed) span; nullopt when the span was truncated away.
std::optional<TokenSpan> align_answer_span(const TokenizedPair& pair, const std::string& context,
                                           std::size_t char_start, std::size_t char_end);

// A record ready for the model: packed pair plus training targets.
struct EncodedExample {
    TokenizedPair pair;
    CategoryLabel label = CategoryLabel::Diagnosis;
    std::array<double, kNumCategories> soft_targets{};  // one-hot when absent
    std::size_t record_index = 0;                       // into the source record vector
};

// Encodes one record; nullopt when the gold span did not survive truncation.
std::optional<EncodedExample> encode_record(const QARecord& r, std::size_t record_index,
                                            const Vocabulary& v, int max_seq_len);

// Original-text span selected by an inclusive token window, lowercased (the
// model is uncased throughout).
std::string window_text(const TokenizedPair& pair, const std::string& context, TokenSpan span);

}  // namespace mtlqa
