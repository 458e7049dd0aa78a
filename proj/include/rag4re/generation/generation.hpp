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
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <future>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "rag4re/common/http.hpp"
#include "rag4re/common/io.hpp"
#include "rag4re/common/retry.hpp"
#include "rag4re/promptgen/prompt.hpp"

namespace rag4re {

struct DecodeParams {
    double temperature = 0.0;
    std::size_t max_new_tokens = 32;
    std::vector<std::string> stop_sequences;

    // Throws ValidationError on negative temperature or zero token budget.
    void validate() const;
    Json to_json() const;
    std::string digest() const;
};

struct RawResponse {
    std::string query_id;
    std::string text;
    std::string backend_id;
    std::string prompt_digest;
    std::int64_t latency_ms = 0;
    bool from_cache = false;
};

class GenerationBackend {
 public:
    virtual ~GenerationBackend() = default;
    // Stable identity; part of the response cache key.
    virtual const std::string& id() const noexcept = 0;
    // Returns the model text verbatim. Throws BackendError for transport problems and
    // EmptyResponseError when the backend produced no answer at all. Must be thread-safe.
    virtual std::string complete(const PromptBundle& bundle, const DecodeParams& params) = 0;
};

struct HttpChatConfig {
    std::string endpoint;
    std::string model;
    std::string auth_env;
    HttpOptions http;
};

// Chat-completions style: POST {model, messages:[{role:"user", content}], temperature, max_tokens[, stop]},
// reads choices[0].message.content.
class HttpChatBackend final : public GenerationBackend {
 public:
    explicit HttpChatBackend(HttpChatConfig config);
    const std::string& id() const noexcept override { return id_; }
    std::string complete(const PromptBundle& bundle, const DecodeParams& params) override;

    static Json request_body(const std::string& model, const std::string& prompt, const DecodeParams& params);
    // Extracts the first choice's text; throws EmptyResponseError if there is none.
    static std::string parse_response(const std::string& body);

 private:
    HttpChatConfig config_;
    HttpEndpoint endpoint_;
    std::string id_;
};

// Answers from a JSON-lines fixture {prompt_digest, text}; an unknown digest is a hard error.
class ReplayGenerationBackend final : public GenerationBackend {
 public:
    explicit ReplayGenerationBackend(std::unordered_map<std::string, std::string> by_digest,
                                     std::string id = "replay");
    static std::unique_ptr<ReplayGenerationBackend> from_file(const std::filesystem::path& path);

    const std::string& id() const noexcept override { return id_; }
    std::string complete(const PromptBundle& bundle, const DecodeParams& params) override;

 private:
    std::unordered_map<std::string, std::string> by_digest_;
    std::string id_;
};

// Test backend: answers with the retrieved example's gold label ("" when the prompt has no example).
class EchoGoldBackend final : public GenerationBackend {
 public:
    const std::string& id() const noexcept override { return id_; }
    std::string complete(const PromptBundle& bundle, const DecodeParams& params) override;

 private:
    std::string id_ = "echo-gold";
};

// Append-only JSON-lines response cache: a version line, then {key, text, latency_ms, created_at}.
class ResponseCache {
 public:
    static constexpr int kVersion = 1;

    struct Entry {
        std::string text;
        std::int64_t latency_ms = 0;
    };

    ResponseCache() = default;  // in-memory
    explicit ResponseCache(const std::filesystem::path& path);

    static std::string key(std::string_view backend_id, std::string_view params_digest,
                           std::string_view prompt_digest);

    std::optional<Entry> lookup(const std::string& key) const;
    void insert(const std::string& key, const Entry& entry);
    std::size_t size() const;

 private:
    mutable std::mutex mu_;
    std::unordered_map<std::string, Entry> entries_;
    std::unique_ptr<JsonlWriter> writer_;
};

struct GeneratorOptions {
    RetryPolicy retry;
    // 0 disables the budget.
    std::size_t requests_per_minute = 0;
    const std::atomic<bool>* stop = nullptr;
};

// Cache-through, retrying front end to one backend. Concurrent calls with the same cache key
// share one backend request.
class Generator {
 public:
    Generator(GenerationBackend& backend, ResponseCache* cache, DecodeParams params, GeneratorOptions options = {});

    RawResponse generate(const PromptBundle& bundle);

    std::size_t backend_calls() const noexcept { return backend_calls_.load(); }
    const DecodeParams& params() const noexcept { return params_; }
    const std::string& backend_id() const noexcept { return backend_.id(); }

 private:
    ResponseCache::Entry call_backend(const PromptBundle& bundle);
    void wait_for_budget();

    GenerationBackend& backend_;
    ResponseCache* cache_;
    DecodeParams params_;
    std::string params_digest_;
    GeneratorOptions options_;
    std::atomic<std::size_t> backend_calls_{0};

    std::mutex inflight_mu_;
    std::unordered_map<std::string, std::shared_future<ResponseCache::Entry>> inflight_;

    std::mutex budget_mu_;
    std::chrono::steady_clock::time_point next_slot_{};
};

// Uncached single call with the default retry policy.
RawResponse generate(const PromptBundle& bundle, GenerationBackend& backend, const DecodeParams& params);

}  // namespace rag4re
