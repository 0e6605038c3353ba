#include "mtlqa/gazetteer.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <stdexcept>

#include "mtlqa/text.hpp"

namespace mtlqa {

Gazetteer Gazetteer::build(const std::vector<GazetteerEntry>& entries) {
    Gazetteer g;
    std::set<std::pair<std::string, CategoryLabel>> seen;
    for (const auto& e : entries) {
        GazetteerEntry norm = e;
        norm.term = text::normalize_term(e.term);
        if (norm.term.empty()) {
            throw std::invalid_argument("gazetteer term is empty after normalization");
        }
        if (!code_valid_for(norm.category, norm.code)) {
            std::string valid;
            for (const auto& c : category_codes(norm.category)) {
                if (!valid.empty()) valid += ", ";
                valid += c;
            }
            throw std::invalid_argument("semantic-type code \"" + norm.code +
                                        "\" is not listed for category " +
                                        category_name(norm.category) + " (valid: " + valid + ")");
        }
        if (!seen.insert({norm.term, norm.category}).second) {
            throw std::invalid_argument("duplicate gazetteer entry for term \"" + norm.term +
                                        "\" in category " + category_name(norm.category));
        }
        g.index_[norm.term].push_back(g.entries_.size());
        g.max_term_cps_ = std::max(g.max_term_cps_, text::cp_length(norm.term));
        g.entries_.push_back(std::move(norm));
    }
    // Keep multi-category entries in listing order regardless of insert order.
    for (auto& [term, idxs] : g.index_) {
        std::sort(idxs.begin(), idxs.end(), [&](std::size_t a, std::size_t b) {
            return static_cast<int>(g.entries_[a].category) <
                   static_cast<int>(g.entries_[b].category);
        });
    }
    return g;
}

Gazetteer Gazetteer::load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open gazetteer file: " + path);
    std::vector<GazetteerEntry> entries;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            std::size_t comma = line.find(',', start);
            if (comma == std::string::npos) {
                fields.push_back(line.substr(start));
                break;
            }
            fields.push_back(line.substr(start, comma - start));
            start = comma + 1;
        }
        if (fields.size() != 3) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": expected 3 fields `term,category,code`, got " +
                                     std::to_string(fields.size()));
        }
        if (!header_seen) {
            header_seen = true;
            if (fields[0] == "term" && fields[1] == "category" && fields[2] == "code") continue;
        }
        GazetteerEntry e;
        e.term = fields[0];
        try {
            e.category = category_from_name(text::normalize_term(fields[1]));
        } catch (const std::exception& ex) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + ex.what());
        }
        e.code = text::normalize_term(fields[2]);
        for (char& c : e.code) c = static_cast<char>(::toupper(static_cast<unsigned char>(c)));
        entries.push_back(std::move(e));
    }
    try {
        return build(entries);
    } catch (const std::exception& ex) {
        throw std::runtime_error(path + ": " + ex.what());
    }
}

std::vector<GazetteerEntry> Gazetteer::lookup(const std::string& term) const {
    std::vector<GazetteerEntry> out;
    auto it = index_.find(text::normalize_term(term));
    if (it == index_.end()) return out;
    for (std::size_t i : it->second) out.push_back(entries_[i]);
    return out;
}

std::vector<std::string> Gazetteer::terms_with_primary_category(CategoryLabel c) const {
    std::vector<std::string> out;
    for (const auto& [term, idxs] : index_) {
        if (!idxs.empty() && entries_[idxs.front()].category == c) out.push_back(term);
    }
    return out;
}

std::vector<Gazetteer::Span> Gazetteer::match_spans(const std::string& txt) const {
    std::vector<Span> spans;
    if (entries_.empty() || txt.empty()) return spans;
    const text::DecodedText d = text::decode_utf8(txt);
    std::vector<char32_t> low(d.cps.size());
    for (std::size_t i = 0; i < d.cps.size(); ++i) low[i] = text::ascii_lower(d.cps[i]);

    const std::size_t n = low.size();
    std::size_t p = 0;
    while (p < n) {
        const bool boundary_before = p == 0 || !text::is_word_char(low[p - 1]);
        if (!boundary_before || !text::is_word_char(low[p])) {
            ++p;
            continue;
        }
        // Grow the candidate one code point at a time, remembering the longest
        // term hit whose right edge also sits on a word boundary.
        std::string candidate;
        std::size_t best_len = 0;
        const std::vector<std::size_t>* best_entries = nullptr;
        const std::size_t max_len = std::min(max_term_cps_, n - p);
        for (std::size_t len = 1; len <= max_len; ++len) {
            candidate = text::encode_utf8({low.begin() + p, low.begin() + p + len});
            const bool boundary_after = p + len == n || !text::is_word_char(low[p + len]);
            if (!boundary_after) continue;
            auto it = index_.find(candidate);
            if (it != index_.end()) {
                best_len = len;
                best_entries = &it->second;
            }
        }
        if (best_len > 0) {
            Span s;
            s.cp_start = p;
            s.cp_end = p + best_len;
            s.surface = text::cp_substr(txt, s.cp_start, s.cp_end);
            s.entry_indices = best_entries;
            spans.push_back(std::move(s));
            p += best_len;
        } else {
            ++p;
        }
    }
    return spans;
}

std::vector<MedicalEntity> Gazetteer::extract_entities(const std::string& txt) const {
    std::vector<MedicalEntity> out;
    for (const auto& s : match_spans(txt)) {
        const GazetteerEntry& top = entries_[s.entry_indices->front()];
        MedicalEntity e;
        e.surface = s.surface;
        e.char_start = s.cp_start;
        e.char_end = s.cp_end;
        e.category = top.category;
        e.code = top.code;
        out.push_back(std::move(e));
    }
    return out;
}

CategoryAssignment Gazetteer::assign_category(const std::string& answer) const {
    const auto spans = match_spans(answer);
    if (spans.empty()) return {CategoryLabel::Symptoms, true};
    std::array<double, kNumCategories> len{};
    for (const auto& s : spans) {
        for (std::size_t ei : *s.entry_indices) {
            len[static_cast<int>(entries_[ei].category)] +=
                static_cast<double>(s.cp_end - s.cp_start);
        }
    }
    int best = 0;
    for (int c = 1; c < kNumCategories; ++c) {
        if (len[c] > len[best]) best = c;
    }
    return {static_cast<CategoryLabel>(best), false};
}

CategoryDistribution Gazetteer::assign_soft_labels(const std::string& answer) const {
    CategoryDistribution dist{};
    const auto spans = match_spans(answer);
    if (spans.empty()) return dist;
    std::array<double, kNumCategories> len{};
    double max_len = 0.0;
    for (const auto& s : spans) {
        for (std::size_t ei : *s.entry_indices) {
            double& l = len[static_cast<int>(entries_[ei].category)];
            l += static_cast<double>(s.cp_end - s.cp_start);
            max_len = std::max(max_len, l);
        }
    }
    for (int c = 0; c < kNumCategories; ++c) dist[c] = len[c] / max_len;
    return dist;
}

}  // namespace mtlqa
