#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "mtlqa/dataset.hpp"
#include "mtlqa/gazetteer.hpp"
#include "mtlqa/record.hpp"

namespace mtlqa {

// Size, category mix, and seed for the synthetic clinical-note generator.
struct GeneratorSpec {
    std::size_t size = 100;
    // Proportions per category; must sum to 1. Defaults to the reference
    // corpus distribution.
    std::array<double, kNumCategories> mix = default_mix();
    std::uint64_t seed = 0;

    static std::array<double, kNumCategories> default_mix();
};

// Templated clinical-style records whose answer terms come from the gazetteer
// of the requested category, with exact character offsets. Deterministic per
// seed; output always passes record validation.
std::vector<QARecord> generate_synthetic_corpus(const GeneratorSpec& spec, const Gazetteer& g);

}  // namespace mtlqa
