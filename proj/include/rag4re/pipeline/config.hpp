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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "rag4re/common/io.hpp"
#include "rag4re/common/retry.hpp"
#include "rag4re/corpus/corpus.hpp"
#include "rag4re/evalkit/evalkit.hpp"
#include "rag4re/generation/generation.hpp"

namespace rag4re {

enum class VariantSelection { kSimple, kRag, kBoth };

std::string_view to_string(VariantSelection v) noexcept;
VariantSelection parse_variant_selection(std::string_view name);

struct DatasetConfig {
    DatasetKind kind = DatasetKind::kTacred;
    std::filesystem::path train;
    std::filesystem::path test;
    std::optional<std::filesystem::path> inventory;  // required for custom
    bool negative_label_semantics = true;
};

struct EmbeddingConfig {
    std::string kind;  // "http" | "replay"; empty when no rag variant is run
    std::string endpoint;
    std::string model;
    std::string auth_env;
    std::filesystem::path fixture;
    std::size_t batch_size = 32;
    std::size_t in_flight = 4;
    int timeout_s = 60;
    RetryPolicy retry;
};

struct GenerationConfig {
    std::string kind = "http-chat";  // "http-chat" | "replay" | "echo-gold"
    std::string endpoint;
    std::string model;
    std::string auth_env;
    std::filesystem::path fixture;
    int timeout_s = 120;
    DecodeParams params;
    RetryPolicy retry;
    std::size_t in_flight = 4;
    std::size_t requests_per_minute = 0;
};

// Single declarative run description. Relative paths are resolved against the config file's directory.
struct RunConfig {
    DatasetConfig dataset;
    EmbeddingConfig embedding;
    GenerationConfig generation;
    std::string simple_template = "default-simple";
    std::string rag_template = "default-rag";
    VariantSelection variant = VariantSelection::kBoth;
    std::size_t k = 1;
    bool exclude_negative_examples = false;
    bool exclude_self_retrieval = true;
    std::filesystem::path output_dir;
    std::filesystem::path embedding_db;     // default <output_dir>/embeddings.db
    std::filesystem::path embedding_cache;  // default <output_dir>/cache/embeddings.jsonl
    std::filesystem::path response_cache;   // default <output_dir>/cache/responses.jsonl
    std::optional<std::filesystem::path> refine_rules;
    ScoringMode scoring_mode = ScoringMode::kPositiveMicro;
    std::uint64_t seed = 0;

    static RunConfig from_json(const Json& j, const std::filesystem::path& base_dir);
    static RunConfig load(const std::filesystem::path& path);

    // Throws ValidationError when the config cannot drive a run of `variant`.
    void validate(VariantSelection variant) const;

    // Fully resolved, canonical form; snapshotted into every run.
    Json to_json() const;
    std::string digest() const;
};

}  // namespace rag4re
