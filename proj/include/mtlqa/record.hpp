#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mtlqa/category.hpp"

namespace mtlqa {

// One (question, context, answer span, category) example. Offsets are
// half-open and count Unicode scalar values of `context`.
struct QARecord {
    std::string id;
    std::string question;
    std::string context;
    std::string answer_text;
    std::size_t answer_char_start = 0;
    std::size_t answer_char_end = 0;
    CategoryLabel label = CategoryLabel::Diagnosis;

    // Sigmoid-mode targets; values in [0,1], hard label carries the maximum.
    std::optional<std::map<CategoryLabel, double>> soft_labels;

    // Set on duplicates introduced by oversampling: id of the source record.
    std::optional<std::string> source_id;

    // Set when category assignment found no gazetteer match and fell back.
    bool gazetteer_miss = false;

    // Optional alternative acceptable answers (primary span stays canonical).
    std::vector<std::string> all_gold_answers;
};

// Throws std::invalid_argument describing the first violated invariant.
// `where` is prepended to messages (e.g. "line 12") to locate the record.
void validate_record(const QARecord& r, const std::string& where = "");

}  // namespace mtlqa
