#include "mtlqa/synthetic.hpp"

#include <cstdio>
#include <stdexcept>

#include "mtlqa/rng.hpp"
#include "mtlqa/text.hpp"

namespace mtlqa {

std::array<double, kNumCategories> GeneratorSpec::default_mix() {
    const auto& counts = reference_category_counts();
    double total = 0.0;
    for (auto c : counts) total += static_cast<double>(c);
    std::array<double, kNumCategories> mix{};
    for (int i = 0; i < kNumCategories; ++i) mix[i] = static_cast<double>(counts[i]) / total;
    return mix;
}

namespace {

const std::vector<std::string> kDoses = {"5mg", "10mg", "20mg", "25mg", "40mg", "250mg", "500mg"};
const std::vector<std::string> kTimes = {"last week", "in early March", "two years ago",
                                         "on admission", "during a prior visit"};
const std::vector<std::string> kDayCounts = {"two", "three", "five", "ten"};
const std::vector<std::string> kLabValues = {"8.2", "142", "3.9", "11.5", "98"};

std::string title_case(const std::string& term) {
    std::string out = term;
    bool start = true;
    for (char& c : out) {
        if (start && c >= 'a' && c <= 'z') c -= 32;
        start = (c == ' ' || c == '-');
    }
    return out;
}

const std::string& pick(const std::vector<std::string>& pool, Rng& rng) {
    return pool[rng.next_below(pool.size())];
}

struct Draft {
    std::string question;
    std::string prefix;  // context text before the answer span
    std::string answer;
    std::string suffix;  // context text after the answer span
};

Draft draft_record(CategoryLabel c, const std::string& term, const std::string& dx, Rng& rng) {
    Draft d;
    switch (c) {
        case CategoryLabel::Diagnosis: {
            d.answer = term;
            switch (rng.next_below(3)) {
                case 0:
                    d.prefix = "The patient was diagnosed with ";
                    d.suffix = " " + pick(kTimes, rng) + " and remains under observation.";
                    break;
                case 1:
                    d.prefix = "Assessment notes ";
                    d.suffix = " as the primary problem; home medications were continued.";
                    break;
                default:
                    d.prefix = "History is significant for ";
                    d.suffix = ", managed conservatively since " + pick(kTimes, rng) + ".";
                    break;
            }
            const std::vector<std::string> qs = {
                "What condition was the patient diagnosed with?",
                "What diagnosis was documented during the visit?",
                "What is the primary problem listed in the assessment?"};
            d.question = pick(qs, rng);
            break;
        }
        case CategoryLabel::Medication: {
            d.answer = title_case(term) + " " + pick(kDoses, rng) + " daily";
            bool ctx_has_dx = true;
            switch (rng.next_below(3)) {
                case 0:
                    d.prefix = "The patient was diagnosed with " + dx + " and prescribed ";
                    d.suffix = ".";
                    break;
                case 1:
                    d.prefix = "Discharge plan includes ";
                    d.suffix = " for " + dx + ".";
                    break;
                default:
                    d.prefix = "The clinic started ";
                    d.suffix = " after reviewing prior records.";
                    ctx_has_dx = false;
                    break;
            }
            std::vector<std::string> qs = {"What medication was prescribed?",
                                           "Which drug was started for the patient?"};
            if (ctx_has_dx) qs.push_back("What medication was prescribed for " + dx + "?");
            d.question = pick(qs, rng);
            break;
        }
        case CategoryLabel::Symptoms: {
            d.answer = term;
            switch (rng.next_below(3)) {
                case 0:
                    d.prefix = "The patient presented with ";
                    d.suffix = " for the past " + pick(kDayCounts, rng) + " days.";
                    break;
                case 1:
                    d.prefix = "Chief complaint on arrival was ";
                    d.suffix = ", worse at night.";
                    break;
                default:
                    d.prefix = "Review of systems was notable for ";
                    d.suffix = " and poor sleep.";
                    break;
            }
            const std::vector<std::string> qs = {
                "What symptom did the patient report?", "What was the chief complaint?",
                "Which symptom is documented in the review of systems?"};
            d.question = pick(qs, rng);
            break;
        }
        case CategoryLabel::Procedure: {
            d.answer = term;
            switch (rng.next_below(3)) {
                case 0:
                    d.prefix = "The patient underwent ";
                    d.suffix = " without complications.";
                    break;
                case 1:
                    d.prefix = "An elective ";
                    d.suffix = " was performed on hospital day two.";
                    break;
                default:
                    d.prefix = "Operative note describes ";
                    d.suffix = " completed under anesthesia.";
                    break;
            }
            const std::vector<std::string> qs = {
                "What procedure was performed?", "What procedure did the patient undergo?",
                "Which intervention does the operative note describe?"};
            d.question = pick(qs, rng);
            break;
        }
        case CategoryLabel::LabReport: {
            d.answer = term;
            switch (rng.next_below(3)) {
                case 0:
                    d.prefix = "Laboratory review showed ";
                    d.suffix = " of " + pick(kLabValues, rng) + ", repeated on follow-up.";
                    break;
                case 1:
                    d.prefix = "Morning labs flagged ";
                    d.suffix = " at " + pick(kLabValues, rng) + ".";
                    break;
                default:
                    d.prefix = "Prior ";
                    d.suffix = " measured " + pick(kLabValues, rng) + " last month.";
                    break;
            }
            const std::vector<std::string> qs = {"What lab test was abnormal?",
                                                 "Which lab result was flagged?",
                                                 "What laboratory value does the note mention?"};
            d.question = pick(qs, rng);
            break;
        }
    }
    return d;
}

}  // namespace

std::vector<QARecord> generate_synthetic_corpus(const GeneratorSpec& spec, const Gazetteer& g) {
    if (spec.size < 5) {
        throw std::invalid_argument("synthetic corpus size must be at least 5, got " +
                                    std::to_string(spec.size));
    }
    double mix_sum = 0.0;
    for (double m : spec.mix) {
        if (m < 0.0) throw std::invalid_argument("category mix proportions must be non-negative");
        mix_sum += m;
    }
    if (mix_sum < 1.0 - 1e-9 || mix_sum > 1.0 + 1e-9) {
        throw std::invalid_argument("category mix proportions must sum to 1");
    }

    const auto alloc = largest_remainder_alloc(
        spec.size, std::vector<double>(spec.mix.begin(), spec.mix.end()));

    std::array<std::vector<std::string>, kNumCategories> terms;
    for (CategoryLabel c : kAllCategories) {
        const int i = static_cast<int>(c);
        if (alloc[i] == 0) continue;
        terms[i] = g.terms_with_primary_category(c);
        if (terms[i].empty()) {
            throw std::invalid_argument("requested category " + category_name(c) +
                                        " has no terms in the gazetteer");
        }
    }
    // Distractor diagnoses for medication templates; a plain phrase when the
    // gazetteer carries none.
    std::vector<std::string> dx_pool = g.terms_with_primary_category(CategoryLabel::Diagnosis);
    if (dx_pool.empty()) dx_pool.push_back("a chronic condition");

    Rng rng(spec.seed);
    std::vector<QARecord> records;
    records.reserve(spec.size);
    for (CategoryLabel c : kAllCategories) {
        const int i = static_cast<int>(c);
        for (std::size_t k = 0; k < alloc[i]; ++k) {
            const std::string& term = terms[i][rng.next_below(terms[i].size())];
            const std::string& dx = dx_pool[rng.next_below(dx_pool.size())];
            const Draft d = draft_record(c, term, dx, rng);
            QARecord r;
            r.question = d.question;
            r.context = d.prefix + d.answer + d.suffix;
            r.answer_text = d.answer;
            r.answer_char_start = text::cp_length(d.prefix);
            r.answer_char_end = r.answer_char_start + text::cp_length(d.answer);
            r.label = c;
            records.push_back(std::move(r));
        }
    }
    rng.shuffle(records);
    char buf[32];
    for (std::size_t i = 0; i < records.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "synth-%06zu", i);
        records[i].id = buf;
        validate_record(records[i], "synthetic record " + records[i].id);
    }
    return records;
}

}  // namespace mtlqa
