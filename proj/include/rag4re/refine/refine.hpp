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

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rag4re/corpus/corpus.hpp"
#include "rag4re/generation/generation.hpp"

namespace rag4re {

enum class Verdict { kExact, kRefined, kUnparseable };

std::string_view to_string(Verdict v) noexcept;
Verdict parse_verdict(std::string_view name);

struct RefinedPrediction {
    std::string query_id;
    std::string raw_text;
    std::optional<std::string> label;
    std::vector<std::string> rule_trace;
    Verdict verdict = Verdict::kUnparseable;

    friend bool operator==(const RefinedPrediction&, const RefinedPrediction&) = default;
};

namespace rule {
inline constexpr std::string_view kExactMatch = "exact-match";
inline constexpr std::string_view kAlias = "alias";
inline constexpr std::string_view kNegativePhrase = "negative-phrase";
inline constexpr std::string_view kPrefixRestoration = "prefix-restoration";
inline constexpr std::string_view kSubstringUnique = "substring-unique";
}  // namespace rule

// Negative paraphrases and raw->label aliases. Both are matched on normalized text.
struct RefineRules {
    std::vector<std::string> negative_phrases;
    std::map<std::string, std::string> aliases;

    static RefineRules defaults();
    static RefineRules from_json(const Json& j);
    static RefineRules load(const std::filesystem::path& path);
};

// Trim, lowercase, strip surrounding quotes and periods.
std::string normalize_response(std::string_view raw);

// The part of a label that prefix restoration matches: text after the first ':' (TACRED family),
// or before the first '(' (SemEval directions). Lowercased; empty when the label has neither.
std::string restorable_suffix(std::string_view label);

// Ordered rule chain that maps a raw response onto an inventory label:
//   1. exact-match (verdict exact, empty trace)
//   2. alias (configured raw -> label)
//   3. negative-phrase
//   4. prefix-restoration (unique suffix only)
//   5. substring-unique (exactly one label, counting only maximal occurrences)
// The first rule yielding a label wins; otherwise the verdict is unparseable. When rule 1 does not
// fire, the trace lists every rule attempted in order, ending with the one that fired.
class Refiner {
 public:
    explicit Refiner(LabelInventory inventory, RefineRules rules = RefineRules::defaults());

    RefinedPrediction refine(const RawResponse& raw) const;
    RefinedPrediction refine_text(std::string query_id, std::string_view raw_text) const;

    const LabelInventory& inventory() const noexcept { return inventory_; }

 private:
    std::optional<std::string> exact(std::string_view norm) const;
    std::optional<std::string> by_suffix(std::string_view norm) const;
    std::optional<std::string> by_substring(std::string_view norm) const;

    LabelInventory inventory_;
    RefineRules rules_;
    std::unordered_map<std::string, std::vector<std::string>> by_lower_;
    std::unordered_map<std::string, std::vector<std::string>> by_suffix_;
    std::unordered_map<std::string, std::string> aliases_;
    std::vector<std::string> negative_phrases_;
};

RefinedPrediction refine(const RawResponse& raw, const LabelInventory& inventory);

struct RefinementTable {
    std::vector<std::pair<std::string, std::string>> unique;                  // suffix -> label
    std::vector<std::pair<std::string, std::vector<std::string>>> ambiguous;  // suffix -> labels
    std::vector<std::string> exact_only;                                      // labels without a suffix

    OrderedJson to_json() const;
};

RefinementTable refinement_table(const LabelInventory& inventory);

}  // namespace rag4re
