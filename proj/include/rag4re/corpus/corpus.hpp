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
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rag4re/common/io.hpp"

namespace rag4re {

enum class DatasetKind { kTacred, kTacrev, kRetacred, kSemeval, kCustom };

std::string_view to_string(DatasetKind kind) noexcept;
DatasetKind parse_dataset_kind(std::string_view name);
bool is_tacred_family(DatasetKind kind) noexcept;

enum class Split { kTrain, kTest, kValidation };

std::string_view to_string(Split split) noexcept;
Split parse_split(std::string_view name);

// Inclusive token range [start, end].
struct TokenSpan {
    std::size_t start = 0;
    std::size_t end = 0;

    std::size_t length() const noexcept { return end - start + 1; }
    friend bool operator==(const TokenSpan&, const TokenSpan&) = default;
};

struct RelationInstance {
    std::string id;
    std::vector<std::string> tokens;
    TokenSpan head;
    TokenSpan tail;
    std::optional<std::string> head_type;
    std::optional<std::string> tail_type;
    std::optional<std::string> gold_label;
    std::string surface_text;

    std::string head_text() const;
    std::string tail_text() const;

    friend bool operator==(const RelationInstance&, const RelationInstance&) = default;
};

// Closed, ordered label set of one dataset. Construction validates uniqueness and the negative label.
class LabelInventory {
 public:
    LabelInventory(DatasetKind kind, std::vector<std::string> labels, std::optional<std::string> negative_label,
                   bool directed);

    DatasetKind kind() const noexcept { return kind_; }
    const std::vector<std::string>& labels() const noexcept { return labels_; }
    const std::optional<std::string>& negative_label() const noexcept { return negative_label_; }
    bool directed() const noexcept { return directed_; }
    std::size_t size() const noexcept { return labels_.size(); }

    bool contains(std::string_view label) const;
    std::optional<std::size_t> index_of(std::string_view label) const;
    bool is_negative(std::string_view label) const;

    // Same labels, negative-label semantics switched off (every label counts as positive).
    LabelInventory without_negative() const;
    // Appends `label` if absent. Only legal for custom inventories.
    void add_label(std::string label);

    // SHA-256 hex over the newline-joined label list, in order.
    std::string label_order_digest() const;
    // SHA-256 hex over the canonical JSON form (kind, labels, negative label, directed flag).
    std::string digest() const;

    Json to_json() const;
    static LabelInventory from_json(const Json& j);

    friend bool operator==(const LabelInventory& a, const LabelInventory& b) {
        return a.kind_ == b.kind_ && a.labels_ == b.labels_ && a.negative_label_ == b.negative_label_ &&
               a.directed_ == b.directed_;
    }

 private:
    DatasetKind kind_;
    std::vector<std::string> labels_;
    std::optional<std::string> negative_label_;
    bool directed_;
    std::unordered_map<std::string, std::size_t> index_;
};

LabelInventory builtin_inventory(DatasetKind kind);
LabelInventory load_inventory(const std::filesystem::path& path);
// `spec` is either a dataset kind name or a path to an inventory JSON file.
LabelInventory resolve_inventory(std::string_view spec);

struct Corpus {
    Split split = Split::kTrain;
    std::vector<RelationInstance> instances;
    LabelInventory inventory;

    const RelationInstance* find(std::string_view id) const;
    friend bool operator==(const Corpus&, const Corpus&) = default;
};

// Single-space join, no punctuation re-attachment.
std::string detokenize(std::span<const std::string> tokens);

// Checks span bounds, span distinctness and label membership. Throws ValidationError naming the instance.
void validate_instance(const RelationInstance& inst, const LabelInventory& inventory);

enum class CorpusFormat { kTacredJson, kSemevalText, kNormalizedJsonl };

// .json -> TACRED JSON, .jsonl -> normalized, anything else -> SemEval text.
CorpusFormat detect_format(const std::filesystem::path& path);

Corpus load_tacred(const std::filesystem::path& path, const LabelInventory& inventory, Split split = Split::kTrain);
Corpus parse_tacred(std::string_view text, const LabelInventory& inventory, Split split = Split::kTrain);
Corpus load_semeval(const std::filesystem::path& path, const LabelInventory& inventory, Split split = Split::kTrain);
Corpus parse_semeval(std::string_view text, const LabelInventory& inventory, Split split = Split::kTrain);
Corpus load_normalized(const std::filesystem::path& path, const LabelInventory& inventory,
                       Split split = Split::kTrain);
void save_normalized(const Corpus& corpus, const std::filesystem::path& path);
Corpus load_corpus(const std::filesystem::path& path, const LabelInventory& inventory, Split split);

Json instance_to_json(const RelationInstance& inst);
RelationInstance instance_from_json(const Json& j);

}  // namespace rag4re
