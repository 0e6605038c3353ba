#include "mtlqa/encode.hpp"

#include <stdexcept>

#include "mtlqa/text.hpp"

namespace mtlqa {

namespace {

struct Piece {
    int id;
    std::size_t cp_start, cp_end;
};

// Word pieces with per-piece character ranges. Pieces partition the word's
// code points; an [UNK] covers the whole word.
std::vector<Piece> pieces_with_offsets(const PreToken& t, const Vocabulary& v) {
    std::vector<Piece> out;
    const auto pieces = wordpiece_tokenize(t.token, v);
    if (pieces.size() == 1 && pieces[0] == Vocabulary::kUnk) {
        out.push_back({Vocabulary::kUnkId, t.cp_start, t.cp_end});
        return out;
    }
    std::size_t at = t.cp_start;
    for (const auto& p : pieces) {
        const bool cont = p.size() > 2 && p[0] == '#' && p[1] == '#';
        const std::size_t body_cps = text::cp_length(cont ? p.substr(2) : p);
        out.push_back({*v.id_of(p), at, at + body_cps});
        at += body_cps;
    }
    return out;
}

}  // namespace

TokenizedPair encode_pair(const std::string& question, const std::string& context,
                          const Vocabulary& v, int max_seq_len) {
    if (max_seq_len < 3) throw std::invalid_argument("max_seq_len must be at least 3");

    std::vector<int> q_ids;
    for (const auto& t : pre_tokenize(question)) {
        for (const auto& p : wordpiece_tokenize(t.token, v)) q_ids.push_back(*v.id_of(p));
    }
    const int budget = max_seq_len - 3 - static_cast<int>(q_ids.size());
    if (budget < 0) {
        throw std::invalid_argument("question alone exceeds the sequence budget: " +
                                    std::to_string(q_ids.size()) + " tokens with max_seq_len " +
                                    std::to_string(max_seq_len));
    }

    std::vector<Piece> ctx;
    for (const auto& t : pre_tokenize(context)) {
        for (const auto& p : pieces_with_offsets(t, v)) ctx.push_back(p);
    }
    TokenizedPair pair;
    if (static_cast<int>(ctx.size()) > budget) {
        ctx.resize(budget);
        pair.truncated = true;
    }

    pair.ids.reserve(max_seq_len);
    pair.ids.push_back(Vocabulary::kClsId);
    for (int id : q_ids) pair.ids.push_back(id);
    pair.ids.push_back(Vocabulary::kSepId);
    const std::size_t ctx_begin = pair.ids.size();
    for (const auto& p : ctx) pair.ids.push_back(p.id);
    pair.ids.push_back(Vocabulary::kSepId);

    pair.n_real = static_cast<int>(pair.ids.size());
    pair.segment_ids.assign(max_seq_len, 0);
    pair.attention.assign(max_seq_len, 0);
    pair.offsets.assign(max_seq_len, std::nullopt);
    for (int i = 0; i < pair.n_real; ++i) {
        pair.attention[i] = 1;
        if (i >= static_cast<int>(ctx_begin)) pair.segment_ids[i] = 1;
    }
    for (std::size_t k = 0; k < ctx.size(); ++k) {
        pair.offsets[ctx_begin + k] = std::make_pair(ctx[k].cp_start, ctx[k].cp_end);
    }
    pair.ids.resize(max_seq_len, Vocabulary::kPadId);
    return pair;
}

std::optional<TokenSpan> align_answer_span(const TokenizedPair& pair, const std::string& context,
                                           std::size_t char_start, std::size_t char_end) {
    if (char_end <= char_start) return std::nullopt;
    // Trim whitespace off the span edges; only token-covered characters count.
    const text::DecodedText d = text::decode_utf8(context);
    if (char_end > d.cps.size()) throw std::out_of_range("answer span outside context");
    std::size_t s = char_start, e = char_end;
    while (s < e && text::is_ascii_space(d.cps[s])) ++s;
    while (e > s && text::is_ascii_space(d.cps[e - 1])) --e;
    if (s == e) return std::nullopt;

    int start_tok = -1, end_tok = -1;
    for (int i = 0; i < pair.seq_len(); ++i) {
        if (!pair.offsets[i]) continue;
        const auto [a, b] = *pair.offsets[i];
        if (start_tok < 0 && b > s) start_tok = i;
        if (a < e) end_tok = i;
    }
    if (start_tok < 0 || end_tok < 0 || end_tok < start_tok) return std::nullopt;
    // The window must actually cover the trimmed span; a right edge past the
    // last kept token means the span fell to truncation.
    if (pair.offsets[start_tok]->first > s) return std::nullopt;
    if (pair.offsets[end_tok]->second < e) return std::nullopt;
    return TokenSpan{start_tok, end_tok};
}

std::optional<EncodedExample> encode_record(const QARecord& r, std::size_t record_index,
                                            const Vocabulary& v, int max_seq_len) {
    EncodedExample ex;
    ex.pair = encode_pair(r.question, r.context, v, max_seq_len);
    const auto span =
        align_answer_span(ex.pair, r.context, r.answer_char_start, r.answer_char_end);
    if (!span) return std::nullopt;
    ex.pair.gold_span = *span;
    ex.label = r.label;
    ex.record_index = record_index;
    if (r.soft_labels) {
        for (const auto& [cat, p] : *r.soft_labels) ex.soft_targets[static_cast<int>(cat)] = p;
    } else {
        ex.soft_targets[static_cast<int>(r.label)] = 1.0;
    }
    return ex;
}

std::string window_text(const TokenizedPair& pair, const std::string& context, TokenSpan span) {
    if (span.start < 0 || span.end >= pair.seq_len() || span.start > span.end ||
        !pair.offsets[span.start] || !pair.offsets[span.end]) {
        throw std::invalid_argument("token span does not select context tokens");
    }
    return text::ascii_lower(
        text::cp_substr(context, pair.offsets[span.start]->first, pair.offsets[span.end]->second));
}

}  // namespace mtlqa
