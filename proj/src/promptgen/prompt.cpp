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

#include "rag4re/promptgen/prompt.hpp"

#include <array>

#include "rag4re/common/digest.hpp"
#include "rag4re/common/error.hpp"
#include "rag4re/common/resources.hpp"

namespace rag4re {

std::string_view to_string(PromptVariant v) noexcept { return v == PromptVariant::kRag ? "rag" : "simple"; }

PromptVariant parse_variant(std::string_view name) {
    if (name == "simple") return PromptVariant::kSimple;
    if (name == "rag") return PromptVariant::kRag;
    throw ValidationError("unknown prompt variant: " + std::string(name));
}

namespace {

constexpr std::array<std::pair<Placeholder, std::string_view>, 10> kPlaceholders{{
    {Placeholder::kSentence, "sentence"},
    {Placeholder::kHead, "head"},
    {Placeholder::kTail, "tail"},
    {Placeholder::kHeadType, "head_type"},
    {Placeholder::kTailType, "tail_type"},
    {Placeholder::kExampleSentence, "example_sentence"},
    {Placeholder::kExampleHead, "example_head"},
    {Placeholder::kExampleTail, "example_tail"},
    {Placeholder::kExampleLabel, "example_label"},
    {Placeholder::kLabels, "labels"},
}};

}  // namespace

std::string_view placeholder_name(Placeholder p) noexcept {
    for (const auto& [ph, name] : kPlaceholders) {
        if (ph == p) return name;
    }
    return "";
}

bool is_example_placeholder(Placeholder p) noexcept {
    return p == Placeholder::kExampleSentence || p == Placeholder::kExampleHead || p == Placeholder::kExampleTail ||
           p == Placeholder::kExampleLabel;
}

PromptTemplate PromptTemplate::parse(std::string template_id, PromptVariant variant, std::string_view body) {
    PromptTemplate t;
    t.id_ = std::move(template_id);
    t.variant_ = variant;
    t.body_ = std::string(body);
    std::string literal;
    auto flush = [&] {
        if (!literal.empty()) {
            t.segments_.emplace_back(std::move(literal));
            literal.clear();
        }
    };
    for (std::size_t i = 0; i < body.size(); ++i) {
        const char c = body[i];
        if (c == '{' && i + 1 < body.size() && body[i + 1] == '{') {
            literal.push_back('{');
            ++i;
        } else if (c == '}' && i + 1 < body.size() && body[i + 1] == '}') {
            literal.push_back('}');
            ++i;
        } else if (c == '{') {
            const auto close = body.find('}', i + 1);
            if (close == std::string_view::npos) {
                throw TemplateError("template '" + t.id_ + "': unclosed '{' at offset " + std::to_string(i));
            }
            const auto name = body.substr(i + 1, close - i - 1);
            std::optional<Placeholder> found;
            for (const auto& [ph, n] : kPlaceholders) {
                if (n == name) found = ph;
            }
            if (!found) {
                throw TemplateError("template '" + t.id_ + "': unknown placeholder {" + std::string(name) +
                                    "} at offset " + std::to_string(i));
            }
            flush();
            t.segments_.emplace_back(*found);
            i = close;
        } else if (c == '}') {
            throw TemplateError("template '" + t.id_ + "': stray '}' at offset " + std::to_string(i));
        } else {
            literal.push_back(c);
        }
    }
    flush();

    if (!t.uses(Placeholder::kLabels)) {
        throw TemplateError("template '" + t.id_ + "': body must contain {labels}");
    }
    if (variant == PromptVariant::kSimple) {
        for (const auto& seg : t.segments_) {
            if (const auto* p = std::get_if<Placeholder>(&seg); p && is_example_placeholder(*p)) {
                throw TemplateError("template '" + t.id_ + "': simple variant must not reference {" +
                                    std::string(placeholder_name(*p)) + "}");
            }
        }
    } else {
        for (auto required : {Placeholder::kExampleSentence, Placeholder::kExampleLabel}) {
            if (!t.uses(required)) {
                throw TemplateError("template '" + t.id_ + "': rag variant must reference {" +
                                    std::string(placeholder_name(required)) + "}");
            }
        }
    }
    return t;
}

bool PromptTemplate::uses(Placeholder p) const noexcept {
    for (const auto& seg : segments_) {
        if (const auto* q = std::get_if<Placeholder>(&seg); q && *q == p) return true;
    }
    return false;
}

PromptTemplate parse_template_file(std::string_view text) {
    const auto nl = text.find('\n');
    const auto front = text.substr(0, nl);
    std::string_view body = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (body.ends_with("\r\n")) {
        body.remove_suffix(2);
    } else if (body.ends_with('\n')) {
        body.remove_suffix(1);
    }
    Json meta;
    try {
        meta = Json::parse(front);
        return PromptTemplate::parse(meta.at("template_id").get<std::string>(),
                                     parse_variant(meta.at("variant").get<std::string>()), body);
    } catch (const Json::exception& e) {
        throw TemplateError(std::string("template front-matter must be one line of JSON {template_id, variant}: ") +
                            e.what());
    }
}

PromptTemplate load_template(std::string_view name_or_path) {
    if (name_or_path == "default-simple" || name_or_path == "default-rag") {
        return parse_template_file(builtin_resource("templates/" + std::string(name_or_path) + ".tmpl"));
    }
    return parse_template_file(read_file(std::filesystem::path(name_or_path)));
}

std::string render_label_list(const LabelInventory& inventory) {
    std::string out;
    for (std::size_t i = 0; i < inventory.labels().size(); ++i) {
        if (i > 0) out += kLabelSeparator;
        out += inventory.labels()[i];
    }
    return out;
}

namespace {

PromptBundle render(const RelationInstance& query, const RelationInstance* example, const LabelInventory& inventory,
                    const PromptTemplate& tmpl) {
    const auto labels = render_label_list(inventory);
    std::string text;
    auto unresolved = [&](Placeholder p) -> std::string {
        throw TemplateError("template '" + tmpl.id() + "': unresolved placeholder {" +
                            std::string(placeholder_name(p)) + "} for query '" + query.id + "'");
    };
    for (const auto& seg : tmpl.segments()) {
        if (const auto* lit = std::get_if<std::string>(&seg)) {
            text += *lit;
            continue;
        }
        const auto p = std::get<Placeholder>(seg);
        if (is_example_placeholder(p) && example == nullptr) {
            unresolved(p);
        }
        switch (p) {
            case Placeholder::kSentence: text += query.surface_text; break;
            case Placeholder::kHead: text += query.head_text(); break;
            case Placeholder::kTail: text += query.tail_text(); break;
            case Placeholder::kHeadType: text += query.head_type ? *query.head_type : unresolved(p); break;
            case Placeholder::kTailType: text += query.tail_type ? *query.tail_type : unresolved(p); break;
            case Placeholder::kExampleSentence: text += example->surface_text; break;
            case Placeholder::kExampleHead: text += example->head_text(); break;
            case Placeholder::kExampleTail: text += example->tail_text(); break;
            case Placeholder::kExampleLabel: text += *example->gold_label; break;
            case Placeholder::kLabels: text += labels; break;
        }
    }
    PromptBundle b;
    b.query_id = query.id;
    b.variant = tmpl.variant();
    if (example != nullptr) {
        b.example_id = example->id;
        b.example_label = example->gold_label;
    }
    b.template_id = tmpl.id();
    b.label_order_digest = inventory.label_order_digest();
    b.prompt_digest = sha256_hex(text);
    b.text = std::move(text);
    return b;
}

}  // namespace

PromptBundle render_simple(const RelationInstance& query, const LabelInventory& inventory,
                           const PromptTemplate& tmpl) {
    if (tmpl.variant() != PromptVariant::kSimple) {
        throw TemplateError("render_simple: template '" + tmpl.id() + "' is a rag template");
    }
    return render(query, nullptr, inventory, tmpl);
}

PromptBundle render_rag(const RelationInstance& query, const RelationInstance& example,
                        const LabelInventory& inventory, const PromptTemplate& tmpl) {
    if (tmpl.variant() != PromptVariant::kRag) {
        throw TemplateError("render_rag: template '" + tmpl.id() + "' is a simple template");
    }
    if (!example.gold_label) {
        throw ValidationError("render_rag: retrieved example '" + example.id + "' has no gold label");
    }
    return render(query, &example, inventory, tmpl);
}

}  // namespace rag4re
