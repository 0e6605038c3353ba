#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mtlqa/record.hpp"

namespace mtlqa {

struct DatasetSplit {
    std::vector<QARecord> train;
    std::vector<QARecord> validation;
    std::vector<QARecord> test;
    std::uint64_t seed = 0;
};

struct SplitFractions {
    double train = 0.8;
    double validation = 0.1;
    double test = 0.1;
};

// Eq.-style class weights: w_i = N / (|C| * count(i)).
struct ClassWeights {
    std::array<double, kNumCategories> w{};
    std::array<std::size_t, kNumCategories> counts{};
    std::size_t total = 0;
    static constexpr int num_categories = kNumCategories;

    static ClassWeights uniform();
    double operator[](CategoryLabel c) const { return w[static_cast<int>(c)]; }
};

struct DatasetStatistics {
    std::array<std::size_t, kNumCategories> qa_pairs{};
    std::array<std::size_t, kNumCategories> unique_entities{};
    std::size_t total = 0;
};

// One record per line; see README for the schema. Validates every record and
// reports the offending line number and field on failure.
std::vector<QARecord> load_jsonl(const std::string& path);
void save_jsonl(const std::vector<QARecord>& records, const std::string& path);
std::string record_to_json_line(const QARecord& r);
QARecord record_from_json_line(const std::string& line, const std::string& where = "");

// Per-category largest-remainder allocation of n into parts proportional to
// fractions; remainder ties go to the earlier part. Shared by the splitter and
// the synthetic generator.
std::vector<std::size_t> largest_remainder_alloc(std::size_t n,
                                                 const std::vector<double>& fractions);

// Stratified 3-way split, deterministic per seed. Every category needs at
// least 3 records.
DatasetSplit stratified_split(const std::vector<QARecord>& records,
                              const SplitFractions& fractions, std::uint64_t seed);

std::array<std::size_t, kNumCategories> category_counts(const std::vector<QARecord>& records);

ClassWeights compute_class_weights(const std::vector<QARecord>& records);
ClassWeights class_weights_from_counts(const std::array<std::size_t, kNumCategories>& counts);

// Duplicates minority-category records until every category matches the
// majority count. Duplicates get fresh ids and a source_id pointing at the
// original; balanced input comes back unchanged.
std::vector<QARecord> oversample(const std::vector<QARecord>& records, std::uint64_t seed);

DatasetStatistics dataset_statistics(const std::vector<QARecord>& records);

}  // namespace mtlqa
