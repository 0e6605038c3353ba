#include "mtlqa/record.hpp"

#include <stdexcept>

#include "mtlqa/text.hpp"

namespace mtlqa {

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& msg) {
    throw std::invalid_argument(where.empty() ? msg : where + ": " + msg);
}

}  // namespace

void validate_record(const QARecord& r, const std::string& where) {
    if (r.id.empty()) fail(where, "record id is empty");
    if (!text::valid_utf8(r.question) || !text::valid_utf8(r.context) ||
        !text::valid_utf8(r.answer_text)) {
        fail(where, "record \"" + r.id + "\" contains invalid UTF-8");
    }
    const std::size_t ctx_len = text::cp_length(r.context);
    if (!(r.answer_char_start < r.answer_char_end) || r.answer_char_end > ctx_len) {
        fail(where, "record \"" + r.id + "\": answer offsets [" +
                        std::to_string(r.answer_char_start) + ", " +
                        std::to_string(r.answer_char_end) + ") invalid for context of length " +
                        std::to_string(ctx_len));
    }
    const std::string selected =
        text::cp_substr(r.context, r.answer_char_start, r.answer_char_end);
    if (selected != r.answer_text) {
        fail(where, "record \"" + r.id + "\": answer_text \"" + r.answer_text +
                        "\" does not match context span \"" + selected + "\"");
    }
    if (r.soft_labels) {
        double max_val = 0.0;
        for (const auto& [cat, v] : *r.soft_labels) {
            if (v < 0.0 || v > 1.0) {
                fail(where, "record \"" + r.id + "\": soft label for " + category_name(cat) +
                                " out of [0,1]: " + std::to_string(v));
            }
            if (v > max_val) max_val = v;
        }
        auto it = r.soft_labels->find(r.label);
        const double hard_val = it == r.soft_labels->end() ? 0.0 : it->second;
        if (hard_val < max_val) {
            fail(where, "record \"" + r.id + "\": hard label " + category_name(r.label) +
                            " does not carry the maximum soft-label value");
        }
    }
}

}  // namespace mtlqa
