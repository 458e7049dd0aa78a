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

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rag4re/common/error.hpp"
#include "rag4re/corpus/corpus.hpp"

namespace rag4re {

enum class PromptVariant { kSimple, kRag };

std::string_view to_string(PromptVariant v) noexcept;
PromptVariant parse_variant(std::string_view name);

enum class Placeholder {
    kSentence,
    kHead,
    kTail,
    kHeadType,
    kTailType,
    kExampleSentence,
    kExampleHead,
    kExampleTail,
    kExampleLabel,
    kLabels,
};

std::string_view placeholder_name(Placeholder p) noexcept;
bool is_example_placeholder(Placeholder p) noexcept;

class TemplateError : public ValidationError {
 public:
    using ValidationError::ValidationError;
};

// A prompt body split into literal text and named placeholders. "{{" and "}}" are literal braces.
class PromptTemplate {
 public:
    using Segment = std::variant<std::string, Placeholder>;

    // Validates placeholder names and the variant rules: simple templates use no example_*
    // placeholder; rag templates use {example_sentence} and {example_label}; both use {labels}.
    static PromptTemplate parse(std::string template_id, PromptVariant variant, std::string_view body);

    const std::string& id() const noexcept { return id_; }
    PromptVariant variant() const noexcept { return variant_; }
    const std::string& body() const noexcept { return body_; }
    const std::vector<Segment>& segments() const noexcept { return segments_; }
    bool uses(Placeholder p) const noexcept;

 private:
    PromptTemplate() = default;

    std::string id_;
    PromptVariant variant_ = PromptVariant::kSimple;
    std::string body_;
    std::vector<Segment> segments_;
};

// "default-simple" / "default-rag", or a file: one line of JSON {template_id, variant}, then the body.
PromptTemplate load_template(std::string_view name_or_path);
PromptTemplate parse_template_file(std::string_view text);

struct PromptBundle {
    std::string query_id;
    std::string text;
    PromptVariant variant = PromptVariant::kSimple;
    std::optional<std::string> example_id;
    std::optional<std::string> example_label;
    double example_score = 0.0;
    std::string template_id;
    std::string label_order_digest;
    std::string prompt_digest;  // SHA-256 hex of `text`

    friend bool operator==(const PromptBundle&, const PromptBundle&) = default;
};

inline constexpr std::string_view kLabelSeparator = ", ";

std::string render_label_list(const LabelInventory& inventory);

PromptBundle render_simple(const RelationInstance& query, const LabelInventory& inventory,
                           const PromptTemplate& tmpl);
PromptBundle render_rag(const RelationInstance& query, const RelationInstance& example,
                        const LabelInventory& inventory, const PromptTemplate& tmpl);

}  // namespace rag4re
