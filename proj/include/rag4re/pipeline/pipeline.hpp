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

#include <atomic>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rag4re/embedstore/embedding_backend.hpp"
#include "rag4re/evalkit/evalkit.hpp"
#include "rag4re/generation/generation.hpp"
#include "rag4re/pipeline/config.hpp"

namespace rag4re {

// Injection points for tests and the CLI. Null backends are built from the config.
struct PipelineHooks {
    EmbeddingBackend* embedding = nullptr;
    GenerationBackend* generation = nullptr;
    const std::atomic<bool>* stop = nullptr;
    std::function<void(const std::string&)> log;
};

struct IndexResult {
    std::filesystem::path db_path;
    std::string checksum;
    std::size_t entries = 0;
    std::size_t backend_calls = 0;
};

IndexResult cmd_index(const RunConfig& config, const PipelineHooks& hooks = {});

struct VariantArtifacts {
    PromptVariant variant = PromptVariant::kSimple;
    std::filesystem::path dir;
    ScoredRun score;
    std::size_t backend_calls = 0;
};

struct RunArtifacts {
    std::string config_digest;
    std::optional<std::string> db_checksum;
    std::vector<VariantArtifacts> variants;
    std::optional<ComparisonReport> comparison;
    std::filesystem::path manifest_path;
    // Relative artifact path -> SHA-256 hex, for every deterministic artifact.
    std::map<std::string, std::string> digests;
};

// Per test instance: embed query, retrieve rank-1 example (rag), render, generate, refine.
// Results are committed in corpus order. On interruption or backend failure the committed prefix
// stays on disk and the response cache lets a rerun resume.
RunArtifacts cmd_run(const RunConfig& config, std::optional<VariantSelection> variant = std::nullopt,
                     const PipelineHooks& hooks = {});

// Prediction interchange: JSON-lines {query_id, gold, predicted, verdict, rule_trace[, raw_text]}.
std::vector<RefinedPrediction> read_predictions(const std::filesystem::path& path);

struct ScoreRequest {
    std::filesystem::path predictions;
    std::filesystem::path gold;
    std::string inventory = "tacred";  // kind name or inventory file
    ScoringMode mode = ScoringMode::kPositiveMicro;
    bool negative_label_semantics = true;
    std::optional<std::filesystem::path> out_dir;  // writes score.{json,csv,md} when set
    std::string run_id;
};

ScoredRun cmd_score(const ScoreRequest& request);

// Re-scores a run directory from its predictions file and run.json.
ScoredRun load_scored_run(const std::filesystem::path& run_dir);

ComparisonReport cmd_compare(const std::filesystem::path& a_dir, const std::filesystem::path& b_dir,
                             const std::optional<std::filesystem::path>& out_dir = std::nullopt);

}  // namespace rag4re
