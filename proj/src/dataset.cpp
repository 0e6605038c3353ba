#include "mtlqa/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "mtlqa/rng.hpp"
#include "mtlqa/text.hpp"

namespace mtlqa {

using ordered_json = nlohmann::ordered_json;

ClassWeights ClassWeights::uniform() {
    ClassWeights cw;
    cw.w.fill(1.0);
    cw.counts.fill(1);
    cw.total = kNumCategories;
    return cw;
}

std::string record_to_json_line(const QARecord& r) {
    ordered_json j;
    j["id"] = r.id;
    j["question"] = r.question;
    j["context"] = r.context;
    j["answer_text"] = r.answer_text;
    j["answer_char_start"] = r.answer_char_start;
    j["answer_char_end"] = r.answer_char_end;
    j["label"] = category_name(r.label);
    if (r.soft_labels) {
        ordered_json sl;
        for (CategoryLabel c : kAllCategories) {
            auto it = r.soft_labels->find(c);
            if (it != r.soft_labels->end()) sl[category_name(c)] = it->second;
        }
        j["soft_labels"] = sl;
    }
    if (r.source_id) j["source_id"] = *r.source_id;
    if (r.gazetteer_miss) j["gazetteer_miss"] = true;
    if (!r.all_gold_answers.empty()) j["all_gold_answers"] = r.all_gold_answers;
    return j.dump();
}

QARecord record_from_json_line(const std::string& line, const std::string& where) {
    ordered_json j;
    try {
        j = ordered_json::parse(line);
    } catch (const std::exception& ex) {
        throw std::invalid_argument(where + ": malformed JSON: " + ex.what());
    }
    QARecord r;
    auto require = [&](const char* field) -> const ordered_json& {
        auto it = j.find(field);
        if (it == j.end()) {
            throw std::invalid_argument(where + ": missing field \"" + field + "\"");
        }
        return *it;
    };
    auto as_string = [&](const char* field) -> std::string {
        const auto& v = require(field);
        if (!v.is_string()) {
            throw std::invalid_argument(where + ": field \"" + field + "\" must be a string");
        }
        return v.get<std::string>();
    };
    auto as_offset = [&](const char* field) -> std::size_t {
        const auto& v = require(field);
        if (!v.is_number_unsigned() && !v.is_number_integer()) {
            throw std::invalid_argument(where + ": field \"" + field +
                                        "\" must be a non-negative integer");
        }
        auto n = v.get<long long>();
        if (n < 0) {
            throw std::invalid_argument(where + ": field \"" + field + "\" must be >= 0");
        }
        return static_cast<std::size_t>(n);
    };
    r.id = as_string("id");
    r.question = as_string("question");
    r.context = as_string("context");
    r.answer_text = as_string("answer_text");
    r.answer_char_start = as_offset("answer_char_start");
    r.answer_char_end = as_offset("answer_char_end");
    try {
        r.label = category_from_name(as_string("label"));
    } catch (const std::invalid_argument& ex) {
        throw std::invalid_argument(where + ": field \"label\": " + ex.what());
    }
    if (auto it = j.find("soft_labels"); it != j.end()) {
        if (!it->is_object()) {
            throw std::invalid_argument(where + ": field \"soft_labels\" must be an object");
        }
        std::map<CategoryLabel, double> sl;
        for (const auto& [k, v] : it->items()) {
            CategoryLabel c;
            try {
                c = category_from_name(k);
            } catch (const std::invalid_argument& ex) {
                throw std::invalid_argument(where + ": field \"soft_labels\": " + ex.what());
            }
            if (!v.is_number()) {
                throw std::invalid_argument(where + ": field \"soft_labels." + k +
                                            "\" must be a number");
            }
            sl[c] = v.get<double>();
        }
        r.soft_labels = std::move(sl);
    }
    if (auto it = j.find("source_id"); it != j.end()) r.source_id = it->get<std::string>();
    if (auto it = j.find("gazetteer_miss"); it != j.end()) r.gazetteer_miss = it->get<bool>();
    if (auto it = j.find("all_gold_answers"); it != j.end()) {
        r.all_gold_answers = it->get<std::vector<std::string>>();
    }
    validate_record(r, where);
    return r;
}

std::vector<QARecord> load_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset file: " + path);
    std::vector<QARecord> records;
    std::string line;
    std::size_t line_no = 0;
    std::set<std::string> ids;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::string where = path + ":" + std::to_string(line_no);
        records.push_back(record_from_json_line(line, where));
        if (!ids.insert(records.back().id).second) {
            throw std::invalid_argument(where + ": duplicate record id \"" + records.back().id +
                                        "\"");
        }
    }
    return records;
}

void save_jsonl(const std::vector<QARecord>& records, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write dataset file: " + path);
    for (const auto& r : records) out << record_to_json_line(r) << '\n';
}

std::vector<std::size_t> largest_remainder_alloc(std::size_t n,
                                                 const std::vector<double>& fractions) {
    std::vector<std::size_t> alloc(fractions.size(), 0);
    std::vector<double> remainders(fractions.size(), 0.0);
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < fractions.size(); ++i) {
        const double ideal = fractions[i] * static_cast<double>(n);
        alloc[i] = static_cast<std::size_t>(ideal);
        remainders[i] = ideal - static_cast<double>(alloc[i]);
        assigned += alloc[i];
    }
    std::size_t leftover = n - assigned;
    std::vector<std::size_t> order(fractions.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainders[a] > remainders[b]; });
    for (std::size_t k = 0; k < leftover; ++k) alloc[order[k % order.size()]] += 1;
    return alloc;
}

std::array<std::size_t, kNumCategories> category_counts(const std::vector<QARecord>& records) {
    std::array<std::size_t, kNumCategories> counts{};
    for (const auto& r : records) counts[static_cast<int>(r.label)] += 1;
    return counts;
}

DatasetSplit stratified_split(const std::vector<QARecord>& records,
                              const SplitFractions& fractions, std::uint64_t seed) {
    const double sum = fractions.train + fractions.validation + fractions.test;
    if (fractions.train <= 0 || fractions.validation <= 0 || fractions.test <= 0 ||
        std::abs(sum - 1.0) > 1e-9) {
        throw std::invalid_argument("split fractions must be positive and sum to 1");
    }
    const auto counts = category_counts(records);
    for (CategoryLabel c : kAllCategories) {
        const std::size_t n = counts[static_cast<int>(c)];
        if (n > 0 && n < 3) {
            throw std::invalid_argument("category " + category_name(c) + " has only " +
                                        std::to_string(n) +
                                        " records; need at least 3 to stratify into 3 parts");
        }
    }
    DatasetSplit split;
    split.seed = seed;
    Rng rng(seed);
    // Categories processed in listing order keeps draws reproducible.
    for (CategoryLabel c : kAllCategories) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < records.size(); ++i) {
            if (records[i].label == c) idx.push_back(i);
        }
        if (idx.empty()) continue;
        rng.shuffle(idx);
        const auto alloc = largest_remainder_alloc(
            idx.size(), {fractions.train, fractions.validation, fractions.test});
        std::size_t at = 0;
        for (std::size_t k = 0; k < alloc[0]; ++k) split.train.push_back(records[idx[at++]]);
        for (std::size_t k = 0; k < alloc[1]; ++k) split.validation.push_back(records[idx[at++]]);
        for (std::size_t k = 0; k < alloc[2]; ++k) split.test.push_back(records[idx[at++]]);
    }
    return split;
}

ClassWeights class_weights_from_counts(const std::array<std::size_t, kNumCategories>& counts) {
    ClassWeights cw;
    cw.counts = counts;
    cw.total = 0;
    for (auto c : counts) cw.total += c;
    for (int i = 0; i < kNumCategories; ++i) {
        if (counts[i] == 0) {
            throw std::invalid_argument("cannot compute class weights: category " +
                                        category_name(static_cast<CategoryLabel>(i)) +
                                        " has no records");
        }
        cw.w[i] = static_cast<double>(cw.total) /
                  (static_cast<double>(kNumCategories) * static_cast<double>(counts[i]));
    }
    return cw;
}

ClassWeights compute_class_weights(const std::vector<QARecord>& records) {
    return class_weights_from_counts(category_counts(records));
}

std::vector<QARecord> oversample(const std::vector<QARecord>& records, std::uint64_t seed) {
    if (records.empty()) throw std::invalid_argument("cannot oversample an empty record list");
    const auto counts = category_counts(records);
    std::size_t target = 0;
    for (auto c : counts) target = std::max(target, c);
    for (int i = 0; i < kNumCategories; ++i) {
        if (counts[i] == 0) {
            throw std::invalid_argument("cannot oversample: category " +
                                        category_name(static_cast<CategoryLabel>(i)) +
                                        " has no records");
        }
    }

    std::vector<QARecord> out = records;
    std::set<std::string> used_ids;
    for (const auto& r : records) used_ids.insert(r.id);

    Rng rng(seed);
    std::size_t dup_seq = 0;
    for (CategoryLabel c : kAllCategories) {
        const std::size_t have = counts[static_cast<int>(c)];
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < records.size(); ++i) {
            if (records[i].label == c) idx.push_back(i);
        }
        for (std::size_t k = have; k < target; ++k) {
            const QARecord& src = records[idx[rng.next_below(idx.size())]];
            QARecord dup = src;
            dup.source_id = src.id;
            do {
                dup.id = src.id + "-os" + std::to_string(dup_seq++);
            } while (!used_ids.insert(dup.id).second);
            out.push_back(std::move(dup));
        }
    }
    return out;
}

DatasetStatistics dataset_statistics(const std::vector<QARecord>& records) {
    DatasetStatistics stats;
    std::array<std::set<std::string>, kNumCategories> entities;
    for (const auto& r : records) {
        const int c = static_cast<int>(r.label);
        stats.qa_pairs[c] += 1;
        entities[c].insert(text::ascii_lower(r.answer_text));
    }
    for (int c = 0; c < kNumCategories; ++c) {
        stats.unique_entities[c] = entities[c].size();
        stats.total += stats.qa_pairs[c];
    }
    return stats;
}

}  // namespace mtlqa
