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

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "rag4re/common/error.hpp"
#include "rag4re/common/io.hpp"
#include "rag4re/corpus/corpus.hpp"
#include "rag4re/embedstore/embedding_backend.hpp"
#include "rag4re/generation/generation.hpp"

namespace rag4re::testing {

class TempDir {
 public:
    TempDir() {
        std::random_device rd;
        auto base = std::filesystem::temp_directory_path();
        do {
            path_ = base / ("rag4re-test-" + std::to_string(rd()));
        } while (std::filesystem::exists(path_));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
    std::filesystem::path path_;
};

inline RelationInstance make_instance(std::string id, std::vector<std::string> tokens, TokenSpan head, TokenSpan tail,
                                      std::optional<std::string> label) {
    RelationInstance inst;
    inst.id = std::move(id);
    inst.tokens = std::move(tokens);
    inst.head = head;
    inst.tail = tail;
    inst.gold_label = std::move(label);
    inst.surface_text = detokenize(inst.tokens);
    return inst;
}

inline LabelInventory small_inventory() {
    return LabelInventory(DatasetKind::kCustom, {"no_relation", "per:age", "org:founded"}, "no_relation", false);
}

// Generation mock counting every call; `on_call` may throw or flip a stop flag.
class CountingBackend final : public GenerationBackend {
 public:
    using Answer = std::function<std::string(const PromptBundle&)>;
    explicit CountingBackend(Answer answer, std::string id = "counting-mock") : answer_(std::move(answer)), id_(std::move(id)) {}

    const std::string& id() const noexcept override { return id_; }
    std::string complete(const PromptBundle& bundle, const DecodeParams&) override {
        const auto n = ++calls_;
        if (on_call) on_call(n);
        return answer_(bundle);
    }
    std::size_t calls() const noexcept { return calls_.load(); }

    std::function<void(std::size_t)> on_call;

 private:
    Answer answer_;
    std::string id_;
    std::atomic<std::size_t> calls_{0};
};

// Embedding mock that counts calls and serves a fixed table.
class TableEmbeddingBackend final : public EmbeddingBackend {
 public:
    TableEmbeddingBackend(std::string model, std::unordered_map<std::string, EmbeddingVector> table)
        : model_(std::move(model)), table_(std::move(table)) {}
    const std::string& model_id() const noexcept override { return model_; }
    std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override {
        ++calls_;
        std::vector<EmbeddingVector> out;
        for (const auto& t : texts) {
            auto it = table_.find(t);
            if (it == table_.end()) throw BackendError("no vector for '" + t + "'", 1, false);
            out.push_back(it->second);
        }
        return out;
    }
    std::size_t calls() const noexcept { return calls_.load(); }

 private:
    std::string model_;
    std::unordered_map<std::string, EmbeddingVector> table_;
    std::atomic<std::size_t> calls_{0};
};

// Clustered synthetic dataset: every label owns one axis of the embedding space and every
// sentence sits near its label's axis, so a sentence's nearest neighbour always shares its label.
struct SyntheticSet {
    std::vector<RelationInstance> train;
    std::vector<RelationInstance> test;
    std::unordered_map<std::string, EmbeddingVector> vectors;  // surface text -> vector
    std::vector<std::string> labels;
    std::size_t dim = 16;
};

inline SyntheticSet make_synthetic(std::size_t n_train, std::size_t n_test, std::uint32_t seed = 7) {
    SyntheticSet s;
    s.labels = {"per:age", "org:founded", "per:title", "org:founded_by", "per:employee_of", "no_relation"};
    std::mt19937 rng(seed);
    std::uniform_real_distribution<float> noise(0.0f, 0.1f);
    auto make = [&](const std::string& prefix, std::size_t i) {
        const auto& label = s.labels[i % s.labels.size()];
        std::vector<std::string> tokens{prefix + "Person" + std::to_string(i), "met", prefix + "Group" + std::to_string(i),
                                        "about", "topic" + std::to_string(i % s.labels.size()), "."};
        auto inst = make_instance(prefix + "-" + std::to_string(i), tokens, {0, 0}, {2, 2}, label);
        inst.head_type = "PERSON";
        inst.tail_type = "ORGANIZATION";
        EmbeddingVector v;
        v.values.assign(s.dim, 0.0f);
        for (auto& x : v.values) x = noise(rng);
        v.values[i % s.labels.size()] = 1.0f;
        s.vectors[inst.surface_text] = v;
        return inst;
    };
    for (std::size_t i = 0; i < n_train; ++i) s.train.push_back(make("train", i));
    for (std::size_t i = 0; i < n_test; ++i) s.test.push_back(make("test", i));
    return s;
}

inline Json tacred_record(const RelationInstance& inst) {
    Json j;
    j["id"] = inst.id;
    j["token"] = inst.tokens;
    j["subj_start"] = inst.head.start;
    j["subj_end"] = inst.head.end;
    j["obj_start"] = inst.tail.start;
    j["obj_end"] = inst.tail.end;
    j["subj_type"] = inst.head_type.value_or("PERSON");
    j["obj_type"] = inst.tail_type.value_or("ORGANIZATION");
    j["relation"] = inst.gold_label.value_or("no_relation");
    return j;
}

inline void write_tacred(const std::filesystem::path& path, const std::vector<RelationInstance>& instances) {
    Json arr = Json::array();
    for (const auto& inst : instances) arr.push_back(tacred_record(inst));
    write_file_atomic(path, arr.dump());
}

inline void write_embedding_fixture(const std::filesystem::path& path,
                                    const std::unordered_map<std::string, EmbeddingVector>& vectors) {
    std::vector<std::string> keys;
    for (const auto& [k, v] : vectors) keys.push_back(k);
    std::sort(keys.begin(), keys.end());
    std::string out;
    for (const auto& k : keys) {
        Json j;
        j["text"] = k;
        j["vector"] = vectors.at(k).values;
        out += j.dump() + "\n";
    }
    write_file_atomic(path, out);
}

// Writes a TACRED-format train/test pair plus a replay embedding fixture for `set` under `dir`,
// and returns a config JSON with paths relative to `dir`. Callers fill in "generation".
inline Json write_workspace(const std::filesystem::path& dir, const SyntheticSet& set) {
    write_tacred(dir / "train.json", set.train);
    write_tacred(dir / "test.json", set.test);
    write_embedding_fixture(dir / "embeddings.jsonl", set.vectors);
    Json cfg;
    cfg["dataset"] = {{"kind", "tacred"}, {"train", "train.json"}, {"test", "test.json"}};
    cfg["embedding"] = {{"kind", "replay"}, {"model", "synthetic-16"}, {"fixture", "embeddings.jsonl"}, {"batch_size", 8}};
    cfg["generation"] = {{"kind", "echo-gold"}, {"retries", 0}, {"backoff_ms", 1}};
    cfg["output_dir"] = "out";
    return cfg;
}

inline std::filesystem::path write_config(const std::filesystem::path& dir, const Json& cfg,
                                          const std::string& name = "config.json") {
    write_file_atomic(dir / name, cfg.dump(2));
    return dir / name;
}

}  // namespace rag4re::testing
