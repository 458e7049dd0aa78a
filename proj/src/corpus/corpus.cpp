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

#include "rag4re/corpus/corpus.hpp"

#include <algorithm>
#include <unordered_set>

#include "rag4re/common/digest.hpp"
#include "rag4re/common/error.hpp"
#include "rag4re/common/resources.hpp"

namespace rag4re {

std::string_view to_string(DatasetKind kind) noexcept {
    switch (kind) {
        case DatasetKind::kTacred: return "tacred";
        case DatasetKind::kTacrev: return "tacrev";
        case DatasetKind::kRetacred: return "retacred";
        case DatasetKind::kSemeval: return "semeval";
        case DatasetKind::kCustom: return "custom";
    }
    return "custom";
}

DatasetKind parse_dataset_kind(std::string_view name) {
    if (name == "tacred") return DatasetKind::kTacred;
    if (name == "tacrev") return DatasetKind::kTacrev;
    if (name == "retacred") return DatasetKind::kRetacred;
    if (name == "semeval") return DatasetKind::kSemeval;
    if (name == "custom") return DatasetKind::kCustom;
    throw ValidationError("unknown dataset kind: " + std::string(name));
}

bool is_tacred_family(DatasetKind kind) noexcept {
    return kind == DatasetKind::kTacred || kind == DatasetKind::kTacrev || kind == DatasetKind::kRetacred;
}

std::string_view to_string(Split split) noexcept {
    switch (split) {
        case Split::kTrain: return "train";
        case Split::kTest: return "test";
        case Split::kValidation: return "validation";
    }
    return "train";
}

Split parse_split(std::string_view name) {
    if (name == "train") return Split::kTrain;
    if (name == "test") return Split::kTest;
    if (name == "validation" || name == "dev") return Split::kValidation;
    throw ValidationError("unknown split: " + std::string(name));
}

namespace {

std::string join_span(const std::vector<std::string>& tokens, TokenSpan span) {
    return detokenize(std::span<const std::string>(tokens).subspan(span.start, span.length()));
}

}  // namespace

std::string RelationInstance::head_text() const { return join_span(tokens, head); }
std::string RelationInstance::tail_text() const { return join_span(tokens, tail); }

// ---------------------------------------------------------------------------
// LabelInventory

LabelInventory::LabelInventory(DatasetKind kind, std::vector<std::string> labels,
                               std::optional<std::string> negative_label, bool directed)
    : kind_(kind), labels_(std::move(labels)), negative_label_(std::move(negative_label)), directed_(directed) {
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (labels_[i].empty()) {
            throw ValidationError("label inventory: empty label at position " + std::to_string(i));
        }
        if (!index_.emplace(labels_[i], i).second) {
            throw ValidationError("label inventory: duplicate label '" + labels_[i] + "'");
        }
    }
    if (negative_label_ && !index_.contains(*negative_label_)) {
        throw ValidationError("label inventory: negative label '" + *negative_label_ + "' is not in the label list");
    }
}

bool LabelInventory::contains(std::string_view label) const { return index_.contains(std::string(label)); }

std::optional<std::size_t> LabelInventory::index_of(std::string_view label) const {
    auto it = index_.find(std::string(label));
    if (it == index_.end()) {
        return std::nullopt;
    }
    return it->second;
}

bool LabelInventory::is_negative(std::string_view label) const {
    return negative_label_.has_value() && *negative_label_ == label;
}

LabelInventory LabelInventory::without_negative() const { return LabelInventory(kind_, labels_, std::nullopt, directed_); }

void LabelInventory::add_label(std::string label) {
    if (kind_ != DatasetKind::kCustom) {
        throw ValidationError("label inventory: cannot extend built-in inventory '" + std::string(to_string(kind_)) +
                              "' with '" + label + "'");
    }
    if (label.empty()) {
        throw ValidationError("label inventory: empty label");
    }
    if (index_.emplace(label, labels_.size()).second) {
        labels_.push_back(std::move(label));
    }
}

std::string LabelInventory::label_order_digest() const {
    std::string joined;
    for (const auto& l : labels_) {
        joined += l;
        joined += '\n';
    }
    return sha256_hex(joined);
}

std::string LabelInventory::digest() const { return sha256_hex(to_json().dump()); }

Json LabelInventory::to_json() const {
    Json j;
    j["dataset_kind"] = std::string(to_string(kind_));
    j["labels"] = labels_;
    j["negative_label"] = negative_label_ ? Json(*negative_label_) : Json(nullptr);
    j["directed"] = directed_;
    return j;
}

LabelInventory LabelInventory::from_json(const Json& j) {
    try {
        auto kind = parse_dataset_kind(j.at("dataset_kind").get<std::string>());
        auto labels = j.at("labels").get<std::vector<std::string>>();
        std::optional<std::string> negative;
        if (j.contains("negative_label") && !j.at("negative_label").is_null()) {
            negative = j.at("negative_label").get<std::string>();
        }
        bool directed = j.value("directed", false);
        return LabelInventory(kind, std::move(labels), std::move(negative), directed);
    } catch (const Json::exception& e) {
        throw ValidationError(std::string("label inventory: malformed JSON: ") + e.what());
    }
}

LabelInventory builtin_inventory(DatasetKind kind) {
    if (kind == DatasetKind::kCustom) {
        throw ValidationError("no built-in inventory for dataset kind 'custom'; supply the labels explicitly");
    }
    auto name = "inventories/" + std::string(to_string(kind)) + ".json";
    return LabelInventory::from_json(Json::parse(builtin_resource(name)));
}

LabelInventory load_inventory(const std::filesystem::path& path) {
    Json j;
    try {
        j = Json::parse(read_file(path));
    } catch (const Json::parse_error& e) {
        throw ParseError(path.string() + ": malformed inventory JSON", static_cast<std::int64_t>(e.byte));
    }
    return LabelInventory::from_json(j);
}

LabelInventory resolve_inventory(std::string_view spec) {
    for (auto kind : {DatasetKind::kTacred, DatasetKind::kTacrev, DatasetKind::kRetacred, DatasetKind::kSemeval}) {
        if (spec == to_string(kind)) {
            return builtin_inventory(kind);
        }
    }
    return load_inventory(std::filesystem::path(spec));
}

const RelationInstance* Corpus::find(std::string_view id) const {
    auto it = std::find_if(instances.begin(), instances.end(), [&](const auto& inst) { return inst.id == id; });
    return it == instances.end() ? nullptr : &*it;
}

// ---------------------------------------------------------------------------

std::string detokenize(std::span<const std::string> tokens) {
    if (tokens.empty()) {
        throw ValidationError("detokenize: empty token list");
    }
    std::size_t size = tokens.size() - 1;
    for (const auto& t : tokens) {
        size += t.size();
    }
    std::string out;
    out.reserve(size);
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i > 0) {
            out.push_back(' ');
        }
        out += tokens[i];
    }
    return out;
}

void validate_instance(const RelationInstance& inst, const LabelInventory& inventory) {
    const auto n = inst.tokens.size();
    auto check = [&](TokenSpan span, const char* which) {
        if (span.start > span.end || span.end >= n) {
            throw ValidationError("instance '" + inst.id + "': " + which + " span [" + std::to_string(span.start) +
                                  ", " + std::to_string(span.end) + "] out of bounds for " + std::to_string(n) +
                                  " tokens");
        }
        for (std::size_t i = span.start; i <= span.end; ++i) {
            if (inst.tokens[i].empty()) {
                throw ValidationError("instance '" + inst.id + "': empty token inside " + which + " span");
            }
        }
    };
    if (n == 0) {
        throw ValidationError("instance '" + inst.id + "': no tokens");
    }
    check(inst.head, "head");
    check(inst.tail, "tail");
    if (inst.head == inst.tail) {
        throw ValidationError("instance '" + inst.id + "': head and tail spans are identical");
    }
    if (inst.gold_label && !inventory.contains(*inst.gold_label)) {
        throw ValidationError("instance '" + inst.id + "': unknown relation label '" + *inst.gold_label +
                              "' for inventory '" + std::string(to_string(inventory.kind())) + "'");
    }
}

namespace {

// Finishes a freshly parsed corpus: surface text, id uniqueness, label checks. Custom inventories
// grow to admit labels first seen in the data.
void finalize(Corpus& corpus) {
    std::unordered_set<std::string> seen;
    for (auto& inst : corpus.instances) {
        if (!seen.insert(inst.id).second) {
            throw ValidationError("duplicate instance id '" + inst.id + "'");
        }
        if (inst.gold_label && corpus.inventory.kind() == DatasetKind::kCustom) {
            corpus.inventory.add_label(*inst.gold_label);
        }
        validate_instance(inst, corpus.inventory);
        inst.surface_text = detokenize(inst.tokens);
    }
}

// Index of the top-level array element containing byte `offset`, for error messages.
std::int64_t record_index_at(std::string_view text, std::size_t offset) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    std::int64_t index = -1;
    offset = std::min(offset, text.size());
    for (std::size_t i = 0; i < offset; ++i) {
        char c = text[i];
        if (in_string) {
            if (escaped) {
                escaped = false;
            } else if (c == '\\') {
                escaped = true;
            } else if (c == '"') {
                in_string = false;
            }
            continue;
        }
        switch (c) {
            case '"': in_string = true; break;
            case '[':
            case '{':
                if (depth == 1) ++index;
                ++depth;
                break;
            case ']':
            case '}': --depth; break;
            default: break;
        }
    }
    return std::max<std::int64_t>(index, 0);
}

std::optional<std::string> optional_string(const Json& rec, const char* key) {
    if (!rec.contains(key) || rec.at(key).is_null()) {
        return std::nullopt;
    }
    return rec.at(key).get<std::string>();
}

}  // namespace

Corpus parse_tacred(std::string_view text, const LabelInventory& inventory, Split split) {
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ParseError(std::string("TACRED JSON: ") + e.what() + "; record index", record_index_at(text, e.byte));
    }
    if (!doc.is_array()) {
        throw ParseError("TACRED JSON: top-level value must be an array", 0);
    }
    Corpus corpus{split, {}, inventory};
    corpus.instances.reserve(doc.size());
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const auto& rec = doc[i];
        RelationInstance inst;
        try {
            inst.id = rec.at("id").is_string() ? rec.at("id").get<std::string>() : rec.at("id").dump();
            inst.tokens = rec.at("token").get<std::vector<std::string>>();
            inst.head = {rec.at("subj_start").get<std::size_t>(), rec.at("subj_end").get<std::size_t>()};
            inst.tail = {rec.at("obj_start").get<std::size_t>(), rec.at("obj_end").get<std::size_t>()};
            inst.head_type = optional_string(rec, "subj_type");
            inst.tail_type = optional_string(rec, "obj_type");
            inst.gold_label = optional_string(rec, "relation");
        } catch (const Json::exception& e) {
            throw ParseError(std::string("TACRED JSON: bad record: ") + e.what() + "; record index",
                             static_cast<std::int64_t>(i));
        }
        corpus.instances.push_back(std::move(inst));
    }
    finalize(corpus);
    return corpus;
}

Corpus load_tacred(const std::filesystem::path& path, const LabelInventory& inventory, Split split) {
    return parse_tacred(read_file(path), inventory, split);
}

namespace {

std::string_view trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) {
        return {};
    }
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

// Tokenizes a SemEval sentence on whitespace after isolating the four entity markers, and
// converts the marked extents to inclusive token spans.
RelationInstance parse_semeval_sentence(std::string id, std::string_view sentence, std::int64_t line) {
    static constexpr std::string_view kMarkers[] = {"<e1>", "</e1>", "<e2>", "</e2>"};
    std::string spaced;
    spaced.reserve(sentence.size() + 16);
    for (std::size_t i = 0; i < sentence.size();) {
        bool matched = false;
        for (auto m : kMarkers) {
            if (sentence.substr(i, m.size()) == m) {
                spaced += ' ';
                spaced += m;
                spaced += ' ';
                i += m.size();
                matched = true;
                break;
            }
        }
        if (!matched) {
            spaced += sentence[i++];
        }
    }

    RelationInstance inst;
    inst.id = std::move(id);
    std::optional<std::size_t> open[2], close[2];
    std::size_t pos = 0;
    while (pos < spaced.size()) {
        auto b = spaced.find_first_not_of(" \t", pos);
        if (b == std::string::npos) break;
        auto e = spaced.find_first_of(" \t", b);
        if (e == std::string::npos) e = spaced.size();
        std::string_view tok(spaced.data() + b, e - b);
        pos = e;
        int which = -1;
        for (int m = 0; m < 4; ++m) {
            if (tok == kMarkers[m]) which = m;
        }
        if (which < 0) {
            inst.tokens.emplace_back(tok);
            continue;
        }
        auto& slot = (which % 2 == 0) ? open[which / 2] : close[which / 2];
        if (slot) {
            throw ParseError("SemEval: repeated marker " + std::string(tok) + " in record '" + inst.id + "'", line);
        }
        slot = inst.tokens.size();
    }
    for (int k = 0; k < 2; ++k) {
        if (!open[k] || !close[k]) {
            throw ValidationError("SemEval record '" + inst.id + "' (line " + std::to_string(line) +
                                  "): missing entity marker <e" + std::to_string(k + 1) + ">");
        }
        if (*close[k] <= *open[k]) {
            throw ValidationError("SemEval record '" + inst.id + "' (line " + std::to_string(line) + "): entity e" +
                                  std::to_string(k + 1) + " is empty or its markers are out of order");
        }
    }
    inst.head = {*open[0], *close[0] - 1};
    inst.tail = {*open[1], *close[1] - 1};
    return inst;
}

}  // namespace

Corpus parse_semeval(std::string_view text, const LabelInventory& inventory, Split split) {
    Corpus corpus{split, {}, inventory};
    std::vector<std::string_view> lines;
    for (std::size_t pos = 0; pos <= text.size();) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        lines.push_back(text.substr(pos, nl - pos));
        pos = nl + 1;
    }
    for (std::size_t i = 0; i < lines.size(); ++i) {
        auto line = trim(lines[i]);
        if (line.empty() || line.starts_with("Comment")) {
            continue;
        }
        auto tab = line.find('\t');
        if (tab == std::string_view::npos) {
            throw ParseError("SemEval: expected '<id>\\t\"<sentence>\"', got '" + std::string(line) + "'",
                             static_cast<std::int64_t>(i + 1));
        }
        auto id = trim(line.substr(0, tab));
        auto sentence = trim(line.substr(tab + 1));
        if (sentence.size() >= 2 && sentence.front() == '"' && sentence.back() == '"') {
            sentence = sentence.substr(1, sentence.size() - 2);
        }
        auto inst = parse_semeval_sentence(std::string(id), sentence, static_cast<std::int64_t>(i + 1));
        std::size_t j = i + 1;
        while (j < lines.size() && trim(lines[j]).empty()) ++j;
        if (j >= lines.size() || trim(lines[j]).find('\t') != std::string_view::npos) {
            throw ParseError("SemEval record '" + inst.id + "': missing label line", static_cast<std::int64_t>(i + 1));
        }
        inst.gold_label = std::string(trim(lines[j]));
        corpus.instances.push_back(std::move(inst));
        i = j;
    }
    finalize(corpus);
    return corpus;
}

Corpus load_semeval(const std::filesystem::path& path, const LabelInventory& inventory, Split split) {
    return parse_semeval(read_file(path), inventory, split);
}

Json instance_to_json(const RelationInstance& inst) {
    auto opt = [](const std::optional<std::string>& v) { return v ? Json(*v) : Json(nullptr); };
    Json j;
    j["id"] = inst.id;
    j["tokens"] = inst.tokens;
    j["head"] = {inst.head.start, inst.head.end};
    j["tail"] = {inst.tail.start, inst.tail.end};
    j["head_type"] = opt(inst.head_type);
    j["tail_type"] = opt(inst.tail_type);
    j["gold_label"] = opt(inst.gold_label);
    return j;
}

RelationInstance instance_from_json(const Json& j) {
    RelationInstance inst;
    inst.id = j.at("id").get<std::string>();
    inst.tokens = j.at("tokens").get<std::vector<std::string>>();
    inst.head = {j.at("head").at(0).get<std::size_t>(), j.at("head").at(1).get<std::size_t>()};
    inst.tail = {j.at("tail").at(0).get<std::size_t>(), j.at("tail").at(1).get<std::size_t>()};
    inst.head_type = optional_string(j, "head_type");
    inst.tail_type = optional_string(j, "tail_type");
    inst.gold_label = optional_string(j, "gold_label");
    return inst;
}

Corpus load_normalized(const std::filesystem::path& path, const LabelInventory& inventory, Split split) {
    Corpus corpus{split, {}, inventory};
    for_each_jsonl(path, [&](const Json& rec, std::size_t line) {
        try {
            corpus.instances.push_back(instance_from_json(rec));
        } catch (const Json::exception& e) {
            throw ParseError(path.string() + ": bad record: " + e.what(), static_cast<std::int64_t>(line));
        }
    });
    finalize(corpus);
    return corpus;
}

void save_normalized(const Corpus& corpus, const std::filesystem::path& path) {
    std::string out;
    for (const auto& inst : corpus.instances) {
        out += instance_to_json(inst).dump();
        out += '\n';
    }
    write_file_atomic(path, out);
}

CorpusFormat detect_format(const std::filesystem::path& path) {
    auto ext = path.extension().string();
    if (ext == ".json") return CorpusFormat::kTacredJson;
    if (ext == ".jsonl") return CorpusFormat::kNormalizedJsonl;
    return CorpusFormat::kSemevalText;
}

Corpus load_corpus(const std::filesystem::path& path, const LabelInventory& inventory, Split split) {
    switch (detect_format(path)) {
        case CorpusFormat::kTacredJson: return load_tacred(path, inventory, split);
        case CorpusFormat::kNormalizedJsonl: return load_normalized(path, inventory, split);
        case CorpusFormat::kSemevalText: return load_semeval(path, inventory, split);
    }
    return load_tacred(path, inventory, split);
}

}  // namespace rag4re
