#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace mtlqa {

// The five medical categories, in priority/listing order. Index order matters:
// category resolution ties and label serialization both use it.
enum class CategoryLabel : int {
    Diagnosis = 0,
    Medication = 1,
    Symptoms = 2,
    Procedure = 3,
    LabReport = 4,
};

inline constexpr int kNumCategories = 5;

inline constexpr std::array<CategoryLabel, kNumCategories> kAllCategories = {
    CategoryLabel::Diagnosis, CategoryLabel::Medication, CategoryLabel::Symptoms,
    CategoryLabel::Procedure, CategoryLabel::LabReport,
};

// Wire name used in JSONL / CSV files ("diagnosis", "medication", ...).
const std::string& category_name(CategoryLabel c);
CategoryLabel category_from_name(const std::string& name);

// UMLS semantic-type (TUI) codes associated with each category.
const std::vector<std::string>& category_codes(CategoryLabel c);
bool code_valid_for(CategoryLabel c, const std::string& code);

// Reference per-category QA-pair counts of the source corpus; used as the
// default category mix for synthetic generation and in class-weight tests.
const std::array<std::size_t, kNumCategories>& reference_category_counts();

}  // namespace mtlqa
