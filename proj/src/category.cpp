#include "mtlqa/category.hpp"

#include <stdexcept>

namespace mtlqa {

namespace {

const std::array<std::string, kNumCategories> kNames = {
    "diagnosis", "medication", "symptoms", "procedure", "lab_report",
};

const std::array<std::vector<std::string>, kNumCategories> kCodes = {{
    {"T047", "T019", "T033"},  // diagnosis
    {"T200", "T109", "T121"},  // medication
    {"T184"},                  // symptoms
    {"T060", "T061", "T058"},  // procedure
    {"T034", "T059"},          // lab_report
}};

const std::array<std::size_t, kNumCategories> kReferenceCounts = {
    141243,  // diagnosis
    255908,  // medication
    23474,   // symptoms
    20540,   // procedure
    14672,   // lab_report
};

}  // namespace

const std::string& category_name(CategoryLabel c) {
    return kNames[static_cast<int>(c)];
}

CategoryLabel category_from_name(const std::string& name) {
    for (int i = 0; i < kNumCategories; ++i) {
        if (kNames[i] == name) return static_cast<CategoryLabel>(i);
    }
    throw std::invalid_argument("unknown category label: \"" + name + "\"");
}

const std::vector<std::string>& category_codes(CategoryLabel c) {
    return kCodes[static_cast<int>(c)];
}

bool code_valid_for(CategoryLabel c, const std::string& code) {
    for (const auto& k : kCodes[static_cast<int>(c)]) {
        if (k == code) return true;
    }
    return false;
}

const std::array<std::size_t, kNumCategories>& reference_category_counts() {
    return kReferenceCounts;
}

}  // namespace mtlqa
