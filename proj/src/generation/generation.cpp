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

#include "rag4re/generation/generation.hpp"

#include <ctime>
#include <thread>

#include "rag4re/common/digest.hpp"
#include "rag4re/common/error.hpp"

namespace rag4re {

void DecodeParams::validate() const {
    if (!(temperature >= 0.0)) {
        throw ValidationError("decode params: temperature must be non-negative");
    }
    if (max_new_tokens == 0) {
        throw ValidationError("decode params: max_new_tokens must be positive");
    }
}

Json DecodeParams::to_json() const {
    Json j;
    j["temperature"] = temperature;
    j["max_new_tokens"] = max_new_tokens;
    j["stop_sequences"] = stop_sequences;
    return j;
}

std::string DecodeParams::digest() const { return sha256_hex(to_json().dump()); }

// ---------------------------------------------------------------------------

HttpChatBackend::HttpChatBackend(HttpChatConfig config)
    : config_(std::move(config)), endpoint_(parse_endpoint(config_.endpoint)) {
    if (config_.model.empty()) {
        throw ValidationError("http-chat backend: model name is required");
    }
    for (auto& [k, v] : bearer_from_env(config_.auth_env)) {
        config_.http.headers.insert_or_assign(k, v);
    }
    id_ = "http-chat:" + config_.model + "@" + config_.endpoint;
}

Json HttpChatBackend::request_body(const std::string& model, const std::string& prompt, const DecodeParams& params) {
    OrderedJson body;
    body["model"] = model;
    body["messages"] = OrderedJson::array({OrderedJson{{"role", "user"}, {"content", prompt}}});
    body["temperature"] = params.temperature;
    body["max_tokens"] = params.max_new_tokens;
    if (!params.stop_sequences.empty()) {
        body["stop"] = params.stop_sequences;
    }
    return Json::parse(body.dump());
}

std::string HttpChatBackend::parse_response(const std::string& body) {
    Json j;
    try {
        j = Json::parse(body);
    } catch (const Json::parse_error& e) {
        throw BackendError(std::string("chat endpoint returned malformed JSON: ") + e.what(), 1, false);
    }
    if (!j.contains("choices") || !j["choices"].is_array() || j["choices"].empty()) {
        throw EmptyResponseError("chat endpoint returned no choices");
    }
    const auto& choice = j["choices"][0];
    if (choice.contains("message") && choice["message"].contains("content") &&
        choice["message"]["content"].is_string()) {
        return choice["message"]["content"].get<std::string>();
    }
    if (choice.contains("text") && choice["text"].is_string()) {
        return choice["text"].get<std::string>();
    }
    throw EmptyResponseError("chat endpoint returned a choice without text content");
}

std::string HttpChatBackend::complete(const PromptBundle& bundle, const DecodeParams& params) {
    const auto body = request_body(config_.model, bundle.text, params).dump();
    return parse_response(http_post_json(endpoint_, body, config_.http));
}

ReplayGenerationBackend::ReplayGenerationBackend(std::unordered_map<std::string, std::string> by_digest,
                                                 std::string id)
    : by_digest_(std::move(by_digest)), id_(std::move(id)) {}

std::unique_ptr<ReplayGenerationBackend> ReplayGenerationBackend::from_file(const std::filesystem::path& path) {
    std::unordered_map<std::string, std::string> by_digest;
    for_each_jsonl(path, [&](const Json& rec, std::size_t line) {
        try {
            by_digest.insert_or_assign(rec.at("prompt_digest").get<std::string>(), rec.at("text").get<std::string>());
        } catch (const Json::exception& e) {
            throw ParseError(path.string() + ": bad replay record: " + e.what(), static_cast<std::int64_t>(line));
        }
    });
    return std::make_unique<ReplayGenerationBackend>(std::move(by_digest), "replay:" + file_sha256_hex(path));
}

std::string ReplayGenerationBackend::complete(const PromptBundle& bundle, const DecodeParams&) {
    auto it = by_digest_.find(bundle.prompt_digest);
    if (it == by_digest_.end()) {
        throw BackendError("replay backend: no fixture response for prompt digest " + bundle.prompt_digest +
                               " (query '" + bundle.query_id + "')",
                           1, false);
    }
    return it->second;
}

std::string EchoGoldBackend::complete(const PromptBundle& bundle, const DecodeParams&) {
    return bundle.example_label.value_or("");
}

// ---------------------------------------------------------------------------

namespace {

std::string utc_now_iso8601() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

ResponseCache::ResponseCache(const std::filesystem::path& path) {
    if (std::filesystem::exists(path)) {
        bool first = true;
        for_each_jsonl(path, [&](const Json& rec, std::size_t line) {
            if (first) {
                first = false;
                if (!rec.contains("rag4re_response_cache") || rec.at("rag4re_response_cache") != kVersion) {
                    throw ValidationError("response cache " + path.string() +
                                          ": cache version mismatch; delete the file to rebuild the cache");
                }
                return;
            }
            try {
                entries_.insert_or_assign(rec.at("key").get<std::string>(),
                                          Entry{rec.at("text").get<std::string>(), rec.value("latency_ms", 0)});
            } catch (const Json::exception& e) {
                throw ParseError(path.string() + ": bad response cache record: " + e.what(),
                                 static_cast<std::int64_t>(line));
            }
        });
        writer_ = std::make_unique<JsonlWriter>(path, JsonlWriter::Mode::kAppend);
        if (first) {
            writer_->write(Json{{"rag4re_response_cache", kVersion}});
        }
    } else {
        writer_ = std::make_unique<JsonlWriter>(path, JsonlWriter::Mode::kTruncate);
        writer_->write(Json{{"rag4re_response_cache", kVersion}});
    }
}

std::string ResponseCache::key(std::string_view backend_id, std::string_view params_digest,
                               std::string_view prompt_digest) {
    Sha256 h;
    h.update(backend_id);
    h.update(std::string_view("\n", 1));
    h.update(params_digest);
    h.update(std::string_view("\n", 1));
    h.update(prompt_digest);
    return to_hex(h.finish());
}

std::optional<ResponseCache::Entry> ResponseCache::lookup(const std::string& key) const {
    std::lock_guard lock(mu_);
    auto it = entries_.find(key);
    if (it == entries_.end()) {
        return std::nullopt;
    }
    return it->second;
}

void ResponseCache::insert(const std::string& key, const Entry& entry) {
    std::lock_guard lock(mu_);
    if (!entries_.emplace(key, entry).second) {
        return;
    }
    if (writer_) {
        OrderedJson rec;
        rec["key"] = key;
        rec["text"] = entry.text;
        rec["latency_ms"] = entry.latency_ms;
        rec["created_at"] = utc_now_iso8601();
        writer_->write(rec);
    }
}

std::size_t ResponseCache::size() const {
    std::lock_guard lock(mu_);
    return entries_.size();
}

// ---------------------------------------------------------------------------

Generator::Generator(GenerationBackend& backend, ResponseCache* cache, DecodeParams params, GeneratorOptions options)
    : backend_(backend), cache_(cache), params_(std::move(params)), options_(options) {
    params_.validate();
    params_digest_ = params_.digest();
}

void Generator::wait_for_budget() {
    if (options_.requests_per_minute == 0) {
        return;
    }
    const auto interval = std::chrono::microseconds(60'000'000 / options_.requests_per_minute);
    std::chrono::steady_clock::time_point slot;
    {
        std::lock_guard lock(budget_mu_);
        const auto now = std::chrono::steady_clock::now();
        slot = std::max(now, next_slot_);
        next_slot_ = slot + interval;
    }
    std::this_thread::sleep_until(slot);
}

ResponseCache::Entry Generator::call_backend(const PromptBundle& bundle) {
    return with_retries(
        options_.retry,
        [&] {
            wait_for_budget();
            ++backend_calls_;
            const auto t0 = std::chrono::steady_clock::now();
            auto text = backend_.complete(bundle, params_);
            const auto ms =
                std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
            return ResponseCache::Entry{std::move(text), static_cast<std::int64_t>(ms)};
        },
        options_.stop);
}

RawResponse Generator::generate(const PromptBundle& bundle) {
    if (sha256_hex(bundle.text) != bundle.prompt_digest) {
        throw ValidationError("generate: prompt digest does not match prompt text for query '" + bundle.query_id + "'");
    }
    RawResponse out;
    out.query_id = bundle.query_id;
    out.backend_id = backend_.id();
    out.prompt_digest = bundle.prompt_digest;

    const auto key = ResponseCache::key(backend_.id(), params_digest_, bundle.prompt_digest);
    if (cache_ != nullptr) {
        if (auto hit = cache_->lookup(key)) {
            out.text = std::move(hit->text);
            out.latency_ms = hit->latency_ms;
            out.from_cache = true;
            return out;
        }
    }

    std::promise<ResponseCache::Entry> promise;
    std::shared_future<ResponseCache::Entry> shared;
    bool owner = false;
    {
        std::lock_guard lock(inflight_mu_);
        if (auto it = inflight_.find(key); it != inflight_.end()) {
            shared = it->second;
        } else if (auto hit = cache_ != nullptr ? cache_->lookup(key) : std::nullopt) {
            out.text = std::move(hit->text);
            out.latency_ms = hit->latency_ms;
            out.from_cache = true;
            return out;
        } else {
            shared = promise.get_future().share();
            inflight_.emplace(key, shared);
            owner = true;
        }
    }
    if (!owner) {
        auto entry = shared.get();
        out.text = std::move(entry.text);
        out.latency_ms = entry.latency_ms;
        out.from_cache = true;
        return out;
    }

    try {
        auto entry = call_backend(bundle);
        if (cache_ != nullptr) {
            cache_->insert(key, entry);
        }
        promise.set_value(entry);
        out.text = std::move(entry.text);
        out.latency_ms = entry.latency_ms;
    } catch (...) {
        promise.set_exception(std::current_exception());
        std::lock_guard lock(inflight_mu_);
        inflight_.erase(key);
        throw;
    }
    std::lock_guard lock(inflight_mu_);
    inflight_.erase(key);
    return out;
}

RawResponse generate(const PromptBundle& bundle, GenerationBackend& backend, const DecodeParams& params) {
    Generator g(backend, nullptr, params);
    return g.generate(bundle);
}

}  // namespace rag4re
