#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "mtlqa/category.hpp"

namespace mtlqa {

struct GazetteerEntry {
    std::string term;  // stored normalized (lowercase, single-spaced)
    CategoryLabel category = CategoryLabel::Diagnosis;
    std::string code;  // semantic-type code, must belong to the category
};

// A gazetteer match inside some queried text. Offsets are code-point indices
// into that text and select exactly `surface`.
struct MedicalEntity {
    std::string surface;
    std::size_t char_start = 0;
    std::size_t char_end = 0;
    CategoryLabel category = CategoryLabel::Diagnosis;
    std::string code;
};

// Per-category probabilities in [0,1]. Multi-label sigmoid semantics: values
// need not sum to 1.
using CategoryDistribution = std::array<double, kNumCategories>;

struct CategoryAssignment {
    CategoryLabel label = CategoryLabel::Symptoms;
    bool gazetteer_miss = false;
};

// Offline term table standing in for UMLS/SciSpacy lookup. Immutable after
// construction; a term may map to several categories.
class Gazetteer {
public:
    Gazetteer() = default;

    // Validates codes against the per-category code lists and rejects
    // duplicate (term, category) pairs. Terms are normalized on insert.
    static Gazetteer build(const std::vector<GazetteerEntry>& entries);

    // CSV with header `term,category,code`; `#` starts a comment line.
    static Gazetteer load_csv(const std::string& path);

    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

    // All category entries for an exact normalized term, listing order.
    std::vector<GazetteerEntry> lookup(const std::string& term) const;

    // Terms whose highest-priority category is `c` (used by the generator).
    std::vector<std::string> terms_with_primary_category(CategoryLabel c) const;

    const std::vector<GazetteerEntry>& entries() const { return entries_; }

    // Left-to-right, longest-match-first, non-overlapping matches. When a term
    // maps to several categories the highest-priority one is reported.
    std::vector<MedicalEntity> extract_entities(const std::string& txt) const;

    // Category of the answer per total matched length, ties by listing order;
    // unmatched answers fall back to Symptoms with the miss flag set.
    CategoryAssignment assign_category(const std::string& answer) const;

    // Length-proportional mass per matched category, rescaled so the maximum
    // is 1.0; unmatched categories get 0.
    CategoryDistribution assign_soft_labels(const std::string& answer) const;

private:
    struct Span {
        std::size_t cp_start, cp_end;
        std::string surface;
        const std::vector<std::size_t>* entry_indices;
    };
    std::vector<Span> match_spans(const std::string& txt) const;

    std::vector<GazetteerEntry> entries_;
    // normalized term -> indices into entries_, in insert order
    std::map<std::string, std::vector<std::size_t>> index_;
    std::size_t max_term_cps_ = 0;
};

}  // namespace mtlqa
