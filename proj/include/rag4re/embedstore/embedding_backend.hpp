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
#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "rag4re/common/http.hpp"
#include "rag4re/common/retry.hpp"
#include "rag4re/corpus/corpus.hpp"
#include "rag4re/embedstore/vector_db.hpp"

namespace rag4re {

class EmbeddingBackend {
 public:
    virtual ~EmbeddingBackend() = default;
    virtual const std::string& model_id() const noexcept = 0;
    // One vector per text, in input order. Implementations must be callable from several threads.
    virtual std::vector<EmbeddingVector> embed(std::span<const std::string> texts) = 0;
};

// Serves vectors from a fixture, keyed by exact text. Unknown texts are a hard (non-retryable) error.
class ReplayEmbeddingBackend final : public EmbeddingBackend {
 public:
    ReplayEmbeddingBackend(std::string model_id, std::unordered_map<std::string, EmbeddingVector> vectors);
    // JSON-lines {"text": ..., "vector": [...]}.
    static std::unique_ptr<ReplayEmbeddingBackend> from_file(std::string model_id, const std::filesystem::path& path);

    const std::string& model_id() const noexcept override { return model_id_; }
    std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override;

    std::size_t calls() const noexcept { return calls_.load(); }

 private:
    std::string model_id_;
    std::unordered_map<std::string, EmbeddingVector> vectors_;
    std::atomic<std::size_t> calls_{0};
};

struct HttpEmbeddingConfig {
    std::string endpoint;
    std::string model;
    std::string auth_env;
    HttpOptions http;
    RetryPolicy retry;
};

// POST {model, texts:[...]} -> {vectors:[[...]]}.
class HttpEmbeddingBackend final : public EmbeddingBackend {
 public:
    explicit HttpEmbeddingBackend(HttpEmbeddingConfig config);
    const std::string& model_id() const noexcept override { return config_.model; }
    std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override;

 private:
    HttpEmbeddingConfig config_;
    HttpEndpoint endpoint_;
};

// Validates the batch and the backend's answer: non-empty batch of non-empty strings, one vector
// per text, a single shared dimension.
std::vector<EmbeddingVector> embed_texts(std::span<const std::string> texts, EmbeddingBackend& backend);

// Append-only JSON-lines cache of vectors keyed by (model_id, SHA-256 of text).
class EmbeddingCache {
 public:
    static constexpr int kVersion = 1;

    // In-memory only.
    EmbeddingCache() = default;
    // Loads existing records; creates the file with a version line if absent.
    explicit EmbeddingCache(const std::filesystem::path& path);

    static std::string key(std::string_view model_id, std::string_view text);

    std::optional<EmbeddingVector> lookup(std::string_view model_id, std::string_view text) const;
    void insert(std::string_view model_id, std::string_view text, const EmbeddingVector& vec);
    std::size_t size() const;

 private:
    mutable std::mutex mu_;
    std::unordered_map<std::string, EmbeddingVector> entries_;
    std::unique_ptr<JsonlWriter> writer_;
};

// Cache-through embedder: only texts missing from the cache reach the backend.
class CachedEmbedder {
 public:
    CachedEmbedder(EmbeddingBackend& backend, EmbeddingCache& cache) : backend_(backend), cache_(cache) {}

    const std::string& model_id() const noexcept { return backend_.model_id(); }
    std::vector<EmbeddingVector> embed(std::span<const std::string> texts);
    std::size_t backend_calls() const noexcept { return backend_calls_.load(); }

 private:
    EmbeddingBackend& backend_;
    EmbeddingCache& cache_;
    std::atomic<std::size_t> backend_calls_{0};
};

struct BuildOptions {
    std::size_t batch_size = 32;
    std::size_t in_flight = 4;
    // Called after each completed batch with (instances done, total).
    std::function<void(std::size_t, std::size_t)> progress;
};

// One entry per training instance, in corpus order. Batches run in a bounded window; entries are
// placed by index, never by completion order.
EmbeddingDB build_db(const Corpus& corpus, CachedEmbedder& embedder, const BuildOptions& options = {});

}  // namespace rag4re
