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

#include "rag4re/embedstore/embedding_backend.hpp"

#include <future>

#include "rag4re/common/digest.hpp"
#include "rag4re/common/error.hpp"

namespace rag4re {

namespace {

EmbeddingVector vector_from_json(const Json& j) {
    EmbeddingVector v;
    v.values.reserve(j.size());
    for (const auto& x : j) {
        v.values.push_back(x.get<float>());
    }
    return v;
}

Json vector_to_json(const EmbeddingVector& v) {
    Json arr = Json::array();
    for (float f : v.values) {
        arr.push_back(f);
    }
    return arr;
}

}  // namespace

ReplayEmbeddingBackend::ReplayEmbeddingBackend(std::string model_id,
                                               std::unordered_map<std::string, EmbeddingVector> vectors)
    : model_id_(std::move(model_id)), vectors_(std::move(vectors)) {}

std::unique_ptr<ReplayEmbeddingBackend> ReplayEmbeddingBackend::from_file(std::string model_id,
                                                                          const std::filesystem::path& path) {
    std::unordered_map<std::string, EmbeddingVector> vectors;
    for_each_jsonl(path, [&](const Json& rec, std::size_t line) {
        try {
            vectors.insert_or_assign(rec.at("text").get<std::string>(), vector_from_json(rec.at("vector")));
        } catch (const Json::exception& e) {
            throw ParseError(path.string() + ": bad replay embedding record: " + e.what(),
                             static_cast<std::int64_t>(line));
        }
    });
    return std::make_unique<ReplayEmbeddingBackend>(std::move(model_id), std::move(vectors));
}

std::vector<EmbeddingVector> ReplayEmbeddingBackend::embed(std::span<const std::string> texts) {
    ++calls_;
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) {
        auto it = vectors_.find(t);
        if (it == vectors_.end()) {
            throw BackendError("replay embedding backend: no fixture vector for text '" + t.substr(0, 80) + "'", 1,
                               false);
        }
        out.push_back(it->second);
    }
    return out;
}

HttpEmbeddingBackend::HttpEmbeddingBackend(HttpEmbeddingConfig config)
    : config_(std::move(config)), endpoint_(parse_endpoint(config_.endpoint)) {
    for (auto& [k, v] : bearer_from_env(config_.auth_env)) {
        config_.http.headers.insert_or_assign(k, v);
    }
}

std::vector<EmbeddingVector> HttpEmbeddingBackend::embed(std::span<const std::string> texts) {
    Json body;
    body["model"] = config_.model;
    body["texts"] = Json::array();
    for (const auto& t : texts) {
        body["texts"].push_back(t);
    }
    const auto payload = body.dump();
    return with_retries(config_.retry, [&] {
        const auto response = http_post_json(endpoint_, payload, config_.http);
        try {
            const auto j = Json::parse(response);
            std::vector<EmbeddingVector> out;
            for (const auto& v : j.at("vectors")) {
                out.push_back(vector_from_json(v));
            }
            return out;
        } catch (const Json::exception& e) {
            throw BackendError(std::string("embedding endpoint returned malformed body: ") + e.what(), 1, false);
        }
    });
}

std::vector<EmbeddingVector> embed_texts(std::span<const std::string> texts, EmbeddingBackend& backend) {
    if (texts.empty()) {
        throw ValidationError("embed_texts: empty batch");
    }
    for (std::size_t i = 0; i < texts.size(); ++i) {
        if (texts[i].empty()) {
            throw ValidationError("embed_texts: empty text at batch position " + std::to_string(i));
        }
    }
    auto out = backend.embed(texts);
    if (out.size() != texts.size()) {
        throw BackendError("embedding backend returned " + std::to_string(out.size()) + " vectors for " +
                               std::to_string(texts.size()) + " texts",
                           1, false);
    }
    for (const auto& v : out) {
        if (v.dim() == 0 || v.dim() != out.front().dim()) {
            throw BackendError("embedding backend returned inconsistent dimensions within one batch", 1, false);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

EmbeddingCache::EmbeddingCache(const std::filesystem::path& path) {
    if (std::filesystem::exists(path)) {
        bool first = true;
        for_each_jsonl(path, [&](const Json& rec, std::size_t line) {
            if (first) {
                first = false;
                if (!rec.contains("rag4re_embedding_cache") || rec.at("rag4re_embedding_cache") != kVersion) {
                    throw ValidationError("embedding cache " + path.string() +
                                          ": version mismatch; delete the file to rebuild the cache");
                }
                return;
            }
            try {
                entries_.insert_or_assign(rec.at("key").get<std::string>(), vector_from_json(rec.at("vector")));
            } catch (const Json::exception& e) {
                throw ParseError(path.string() + ": bad embedding cache record: " + e.what(),
                                 static_cast<std::int64_t>(line));
            }
        });
        writer_ = std::make_unique<JsonlWriter>(path, JsonlWriter::Mode::kAppend);
        if (first) {
            writer_->write(Json{{"rag4re_embedding_cache", kVersion}});
        }
    } else {
        writer_ = std::make_unique<JsonlWriter>(path, JsonlWriter::Mode::kTruncate);
        writer_->write(Json{{"rag4re_embedding_cache", kVersion}});
    }
}

std::string EmbeddingCache::key(std::string_view model_id, std::string_view text) {
    Sha256 h;
    h.update(model_id);
    h.update(std::string_view("\n", 1));
    h.update(text);
    return to_hex(h.finish());
}

std::optional<EmbeddingVector> EmbeddingCache::lookup(std::string_view model_id, std::string_view text) const {
    const auto k = key(model_id, text);
    std::lock_guard lock(mu_);
    auto it = entries_.find(k);
    if (it == entries_.end()) {
        return std::nullopt;
    }
    return it->second;
}

void EmbeddingCache::insert(std::string_view model_id, std::string_view text, const EmbeddingVector& vec) {
    const auto k = key(model_id, text);
    std::lock_guard lock(mu_);
    if (!entries_.emplace(k, vec).second) {
        return;
    }
    if (writer_) {
        writer_->write(Json{{"key", k}, {"vector", vector_to_json(vec)}});
    }
}

std::size_t EmbeddingCache::size() const {
    std::lock_guard lock(mu_);
    return entries_.size();
}

std::vector<EmbeddingVector> CachedEmbedder::embed(std::span<const std::string> texts) {
    std::vector<EmbeddingVector> out(texts.size());
    std::vector<std::string> missing;
    std::vector<std::size_t> missing_at;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        if (auto hit = cache_.lookup(model_id(), texts[i])) {
            out[i] = std::move(*hit);
        } else {
            missing.push_back(texts[i]);
            missing_at.push_back(i);
        }
    }
    if (!missing.empty()) {
        ++backend_calls_;
        auto fresh = embed_texts(missing, backend_);
        for (std::size_t j = 0; j < fresh.size(); ++j) {
            cache_.insert(model_id(), missing[j], fresh[j]);
            out[missing_at[j]] = std::move(fresh[j]);
        }
    }
    for (const auto& v : out) {
        if (v.dim() != out.front().dim()) {
            throw BackendError("embedding dimension changed between cached and fresh vectors", 1, false);
        }
    }
    return out;
}

EmbeddingDB build_db(const Corpus& corpus, CachedEmbedder& embedder, const BuildOptions& options) {
    if (corpus.split != Split::kTrain) {
        throw ValidationError("build_db: the embedding DB is built from the train split only");
    }
    if (options.batch_size == 0 || options.in_flight == 0) {
        throw ValidationError("build_db: batch_size and in_flight must be positive");
    }
    if (corpus.instances.empty()) {
        throw ValidationError("build_db: corpus is empty");
    }
    {
        std::unordered_map<std::string_view, std::size_t> seen;
        for (const auto& inst : corpus.instances) {
            if (!seen.emplace(inst.id, 0).second) {
                throw ValidationError("build_db: duplicate instance id '" + inst.id + "'");
            }
        }
    }

    const std::size_t n = corpus.instances.size();
    const std::size_t batches = (n + options.batch_size - 1) / options.batch_size;
    std::vector<EmbeddingVector> vectors(n);

    auto run_batch = [&](std::size_t b) {
        const std::size_t begin = b * options.batch_size;
        const std::size_t end = std::min(n, begin + options.batch_size);
        std::vector<std::string> texts;
        texts.reserve(end - begin);
        for (std::size_t i = begin; i < end; ++i) {
            texts.push_back(corpus.instances[i].surface_text);
        }
        try {
            auto got = embedder.embed(texts);
            for (std::size_t i = begin; i < end; ++i) {
                vectors[i] = std::move(got[i - begin]);
            }
        } catch (const BackendError& e) {
            throw BackendError(std::string(e.what()) + " [batch ids '" + corpus.instances[begin].id + "'..'" +
                                   corpus.instances[end - 1].id + "']",
                               e.attempts(), e.retryable());
        }
        return end - begin;
    };

    std::size_t done = 0;
    for (std::size_t first = 0; first < batches; first += options.in_flight) {
        const std::size_t last = std::min(batches, first + options.in_flight);
        std::vector<std::future<std::size_t>> window;
        for (std::size_t b = first; b < last; ++b) {
            window.push_back(std::async(std::launch::async, run_batch, b));
        }
        // Drain the whole window before rethrowing so no task outlives `vectors`.
        std::exception_ptr failure;
        for (auto& f : window) {
            try {
                done += f.get();
            } catch (...) {
                if (!failure) failure = std::current_exception();
            }
        }
        if (failure) {
            std::rethrow_exception(failure);
        }
        if (options.progress) {
            options.progress(done, n);
        }
    }

    EmbeddingDB db(embedder.model_id(), vectors.front().dim(), corpus.inventory.digest());
    for (std::size_t i = 0; i < n; ++i) {
        const auto& inst = corpus.instances[i];
        db.add(DbEntry{inst.id, inst.surface_text, inst.gold_label.value_or("")}, vectors[i].span());
    }
    return db;
}

}  // namespace rag4re
