// Copyright (C) 2026 The rag4re Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License"); you may not use this file except in compliance
// with the License. You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software distributed under the License
// is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express
// or implied. See the License for the specific language governing permissions and limitations under the License.

#include "rag4re/refine/refine.hpp"

#include <algorithm>
#include <cctype>

#include "rag4re/common/error.hpp"
#include "rag4re/common/resources.hpp"

namespace rag4re {

std::string_view to_string(Verdict v) noexcept {
    switch (v) {
        case Verdict::kExact: return "exact";
        case Verdict::kRefined: return "refined";
        case Verdict::kUnparseable: return "unparseable";
    }
    return "unparseable";
}

Verdict parse_verdict(std::string_view name) {
    if (name == "exact") return Verdict::kExact;
    if (name == "refined") return Verdict::kRefined;
    if (name == "unparseable") return Verdict::kUnparseable;
    throw ValidationError("unknown verdict: " + std::string(name));
}

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

bool is_wrapper(char c) { return c == '"' || c == '\'' || c == '`' || c == '.'; }

}  // namespace

std::string normalize_response(std::string_view raw) {
    std::size_t b = 0;
    std::size_t e = raw.size();
    for (;;) {
        const auto before = std::pair{b, e};
        while (b < e && is_space(raw[b])) ++b;
        while (e > b && is_space(raw[e - 1])) --e;
        while (b < e && is_wrapper(raw[b])) ++b;
        while (e > b && is_wrapper(raw[e - 1])) --e;
        if (std::pair{b, e} == before) break;
    }
    return lower(raw.substr(b, e - b));
}

std::string restorable_suffix(std::string_view label) {
    if (auto colon = label.find(':'); colon != std::string_view::npos) {
        return lower(label.substr(colon + 1));
    }
    if (auto paren = label.find('('); paren != std::string_view::npos && paren > 0) {
        return lower(label.substr(0, paren));
    }
    return {};
}

RefineRules RefineRules::defaults() { return from_json(Json::parse(builtin_resource("negative_phrases.json"))); }

RefineRules RefineRules::from_json(const Json& j) {
    RefineRules r;
    try {
        if (j.contains("phrases")) {
            r.negative_phrases = j.at("phrases").get<std::vector<std::string>>();
        }
        if (j.contains("aliases")) {
            r.aliases = j.at("aliases").get<std::map<std::string, std::string>>();
        }
    } catch (const Json::exception& e) {
        throw ValidationError(std::string("refine rules: expected {phrases:[...], aliases:{...}}: ") + e.what());
    }
    return r;
}

RefineRules RefineRules::load(const std::filesystem::path& path) {
    try {
        return from_json(Json::parse(read_file(path)));
    } catch (const Json::parse_error& e) {
        throw ParseError(path.string() + ": malformed refine rules JSON", static_cast<std::int64_t>(e.byte));
    }
}

Refiner::Refiner(LabelInventory inventory, RefineRules rules) : inventory_(std::move(inventory)), rules_(std::move(rules)) {
    if (inventory_.size() == 0) {
        throw ValidationError("refine: inventory is empty");
    }
    for (const auto& label : inventory_.labels()) {
        by_lower_[lower(label)].push_back(label);
        if (auto suffix = restorable_suffix(label); !suffix.empty()) {
            by_suffix_[suffix].push_back(label);
        }
    }
    for (const auto& [raw, label] : rules_.aliases) {
        if (!inventory_.contains(label)) {
            throw ValidationError("refine rules: alias '" + raw + "' targets '" + label + "', which is not in the inventory");
        }
        aliases_.insert_or_assign(normalize_response(raw), label);
    }
    for (const auto& p : rules_.negative_phrases) {
        negative_phrases_.push_back(normalize_response(p));
    }
}

std::optional<std::string> Refiner::exact(std::string_view norm) const {
    auto it = by_lower_.find(std::string(norm));
    if (it == by_lower_.end() || it->second.size() != 1) {
        return std::nullopt;
    }
    return it->second.front();
}

std::optional<std::string> Refiner::by_suffix(std::string_view norm) const {
    auto it = by_suffix_.find(std::string(norm));
    if (it == by_suffix_.end() || it->second.size() != 1) {
        return std::nullopt;
    }
    return it->second.front();
}

std::optional<std::string> Refiner::by_substring(std::string_view norm) const {
    struct Match {
        const std::string* label;
        std::size_t length;
        std::vector<std::size_t> positions;
    };
    std::vector<Match> matches;
    for (const auto& [low, labels] : by_lower_) {
        if (labels.size() != 1) continue;
        Match m{&labels.front(), low.size(), {}};
        for (auto pos = norm.find(low); pos != std::string_view::npos; pos = norm.find(low, pos + 1)) {
            m.positions.push_back(pos);
        }
        if (!m.positions.empty()) matches.push_back(std::move(m));
    }
    // Keep a label only if some occurrence is not nested inside a longer matched label
    // ("org:founded" inside "org:founded_by").
    auto nested = [&](const Match& m, std::size_t pos) {
        for (const auto& other : matches) {
            if (other.length <= m.length) continue;
            for (auto op : other.positions) {
                if (op <= pos && pos + m.length <= op + other.length) return true;
            }
        }
        return false;
    };
    const std::string* found = nullptr;
    for (const auto& m : matches) {
        const bool maximal = std::any_of(m.positions.begin(), m.positions.end(), [&](auto p) { return !nested(m, p); });
        if (!maximal) continue;
        if (found != nullptr) return std::nullopt;
        found = m.label;
    }
    if (found == nullptr) return std::nullopt;
    return *found;
}

RefinedPrediction Refiner::refine_text(std::string query_id, std::string_view raw_text) const {
    RefinedPrediction out;
    out.query_id = std::move(query_id);
    out.raw_text = std::string(raw_text);
    const auto norm = normalize_response(raw_text);

    if (auto hit = exact(norm)) {
        out.label = std::move(hit);
        out.verdict = Verdict::kExact;
        return out;
    }
    out.rule_trace.emplace_back(rule::kExactMatch);

    auto fired = [&](std::optional<std::string> label) {
        out.label = std::move(label);
        out.verdict = Verdict::kRefined;
        return out;
    };

    if (!aliases_.empty()) {
        out.rule_trace.emplace_back(rule::kAlias);
        if (auto it = aliases_.find(norm); it != aliases_.end()) {
            return fired(it->second);
        }
    }

    out.rule_trace.emplace_back(rule::kNegativePhrase);
    if (inventory_.negative_label() &&
        std::find(negative_phrases_.begin(), negative_phrases_.end(), norm) != negative_phrases_.end()) {
        return fired(*inventory_.negative_label());
    }

    out.rule_trace.emplace_back(rule::kPrefixRestoration);
    if (auto hit = by_suffix(norm)) {
        return fired(std::move(hit));
    }

    out.rule_trace.emplace_back(rule::kSubstringUnique);
    if (!norm.empty()) {
        if (auto hit = by_substring(norm)) {
            return fired(std::move(hit));
        }
    }

    out.label.reset();
    out.verdict = Verdict::kUnparseable;
    return out;
}

RefinedPrediction Refiner::refine(const RawResponse& raw) const { return refine_text(raw.query_id, raw.text); }

RefinedPrediction refine(const RawResponse& raw, const LabelInventory& inventory) {
    return Refiner(inventory).refine(raw);
}

OrderedJson RefinementTable::to_json() const {
    OrderedJson j;
    j["unique"] = OrderedJson::array();
    for (const auto& [suffix, label] : unique) {
        j["unique"].push_back(OrderedJson{{"suffix", suffix}, {"label", label}});
    }
    j["ambiguous"] = OrderedJson::array();
    for (const auto& [suffix, labels] : ambiguous) {
        j["ambiguous"].push_back(OrderedJson{{"suffix", suffix}, {"labels", labels}});
    }
    j["exact_only"] = exact_only;
    return j;
}

RefinementTable refinement_table(const LabelInventory& inventory) {
    RefinementTable table;
    std::map<std::string, std::vector<std::string>> groups;
    for (const auto& label : inventory.labels()) {
        auto suffix = restorable_suffix(label);
        if (suffix.empty()) {
            table.exact_only.push_back(label);
        } else {
            groups[suffix].push_back(label);
        }
    }
    for (auto& [suffix, labels] : groups) {
        if (labels.size() == 1) {
            table.unique.emplace_back(suffix, labels.front());
        } else {
            table.ambiguous.emplace_back(suffix, std::move(labels));
        }
    }
    return table;
}

}  // namespace rag4re
