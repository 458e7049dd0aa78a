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

#include "rag4re/pipeline/config.hpp"

#include "rag4re/common/digest.hpp"
#include "rag4re/common/error.hpp"

namespace rag4re {

std::string_view to_string(VariantSelection v) noexcept {
    switch (v) {
        case VariantSelection::kSimple: return "simple";
        case VariantSelection::kRag: return "rag";
        case VariantSelection::kBoth: return "both";
    }
    return "both";
}

VariantSelection parse_variant_selection(std::string_view name) {
    if (name == "simple") return VariantSelection::kSimple;
    if (name == "rag") return VariantSelection::kRag;
    if (name == "both") return VariantSelection::kBoth;
    throw ValidationError("unknown variant: " + std::string(name) + " (expected simple, rag or both)");
}

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    if (path.is_relative()) path = base / path;
    return path.lexically_normal();
}

RetryPolicy retry_from_json(const Json& j, RetryPolicy r) {
    r.max_retries = j.value("retries", r.max_retries);
    r.base_backoff = std::chrono::milliseconds(j.value("backoff_ms", static_cast<long long>(r.base_backoff.count())));
    r.multiplier = j.value("backoff_multiplier", r.multiplier);
    if (r.max_retries < 0 || r.base_backoff.count() < 0 || r.multiplier < 1.0) {
        throw ValidationError("config: invalid retry policy");
    }
    return r;
}

Json retry_to_json(const RetryPolicy& r) {
    return Json{{"retries", r.max_retries},
                {"backoff_ms", static_cast<long long>(r.base_backoff.count())},
                {"backoff_multiplier", r.multiplier}};
}

std::string str_or_empty(const std::filesystem::path& p) { return p.empty() ? std::string() : p.string(); }

}  // namespace

RunConfig RunConfig::from_json(const Json& j, const std::filesystem::path& base_dir) {
    RunConfig c;
    try {
        const auto& ds = j.at("dataset");
        c.dataset.kind = parse_dataset_kind(ds.at("kind").get<std::string>());
        if (ds.contains("train")) c.dataset.train = resolve(base_dir, ds.at("train").get<std::string>());
        c.dataset.test = resolve(base_dir, ds.at("test").get<std::string>());
        if (ds.contains("inventory")) c.dataset.inventory = resolve(base_dir, ds.at("inventory").get<std::string>());
        c.dataset.negative_label_semantics = ds.value("negative_label_semantics", true);

        if (j.contains("embedding")) {
            const auto& e = j.at("embedding");
            c.embedding.kind = e.at("kind").get<std::string>();
            c.embedding.endpoint = e.value("endpoint", "");
            c.embedding.model = e.value("model", "");
            c.embedding.auth_env = e.value("auth_env", "");
            if (e.contains("fixture")) c.embedding.fixture = resolve(base_dir, e.at("fixture").get<std::string>());
            c.embedding.batch_size = e.value("batch_size", c.embedding.batch_size);
            c.embedding.in_flight = e.value("in_flight", c.embedding.in_flight);
            c.embedding.timeout_s = e.value("timeout_s", c.embedding.timeout_s);
            c.embedding.retry = retry_from_json(e, c.embedding.retry);
        }

        const auto& g = j.at("generation");
        c.generation.kind = g.at("kind").get<std::string>();
        c.generation.endpoint = g.value("endpoint", "");
        c.generation.model = g.value("model", "");
        c.generation.auth_env = g.value("auth_env", "");
        if (g.contains("fixture")) c.generation.fixture = resolve(base_dir, g.at("fixture").get<std::string>());
        c.generation.timeout_s = g.value("timeout_s", c.generation.timeout_s);
        c.generation.params.temperature = g.value("temperature", 0.0);
        c.generation.params.max_new_tokens = g.value("max_new_tokens", std::size_t{32});
        c.generation.params.stop_sequences = g.value("stop", std::vector<std::string>{});
        c.generation.retry = retry_from_json(g, c.generation.retry);
        c.generation.in_flight = g.value("in_flight", c.generation.in_flight);
        c.generation.requests_per_minute = g.value("requests_per_minute", c.generation.requests_per_minute);

        if (j.contains("templates")) {
            c.simple_template = j.at("templates").value("simple", c.simple_template);
            c.rag_template = j.at("templates").value("rag", c.rag_template);
        }
        auto template_path = [&](std::string& t) {
            if (t != "default-simple" && t != "default-rag") t = resolve(base_dir, t).string();
        };
        template_path(c.simple_template);
        template_path(c.rag_template);

        c.variant = parse_variant_selection(j.value("variant", "both"));
        c.k = j.value("k", std::size_t{1});
        c.exclude_negative_examples = j.value("exclude_negative_examples", false);
        c.exclude_self_retrieval = j.value("exclude_self_retrieval", true);
        c.output_dir = resolve(base_dir, j.at("output_dir").get<std::string>());
        c.embedding_db = j.contains("embedding_db") ? resolve(base_dir, j.at("embedding_db").get<std::string>())
                                                    : c.output_dir / "embeddings.db";
        c.embedding_cache = j.contains("embedding_cache")
                                ? resolve(base_dir, j.at("embedding_cache").get<std::string>())
                                : c.output_dir / "cache" / "embeddings.jsonl";
        c.response_cache = j.contains("response_cache") ? resolve(base_dir, j.at("response_cache").get<std::string>())
                                                        : c.output_dir / "cache" / "responses.jsonl";
        if (j.contains("refine_rules")) c.refine_rules = resolve(base_dir, j.at("refine_rules").get<std::string>());
        c.scoring_mode = parse_scoring_mode(j.value("scoring_mode", "positive-micro"));
        c.seed = j.value("seed", std::uint64_t{0});
    } catch (const Json::exception& e) {
        throw ValidationError(std::string("config: ") + e.what());
    }
    c.generation.params.validate();
    if (c.k == 0) {
        throw ValidationError("config: k must be at least 1");
    }
    if (c.dataset.kind == DatasetKind::kCustom && !c.dataset.inventory) {
        throw ValidationError("config: dataset.kind 'custom' requires dataset.inventory");
    }
    return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
    Json j;
    try {
        j = Json::parse(read_file(path));
    } catch (const Json::parse_error& e) {
        throw ParseError(path.string() + ": malformed config JSON", static_cast<std::int64_t>(e.byte));
    }
    return from_json(j, std::filesystem::absolute(path).parent_path());
}

void RunConfig::validate(VariantSelection v) const {
    const bool needs_rag = v != VariantSelection::kSimple;
    if (needs_rag) {
        if (embedding.kind.empty()) {
            throw ValidationError("config: the rag variant needs an 'embedding' backend section");
        }
        if (dataset.train.empty()) {
            throw ValidationError("config: the rag variant needs dataset.train");
        }
    }
    if (!embedding.kind.empty()) {
        if (embedding.kind != "http" && embedding.kind != "replay") {
            throw ValidationError("config: unknown embedding backend kind '" + embedding.kind + "'");
        }
        if (embedding.model.empty()) {
            throw ValidationError("config: embedding.model is required (it is recorded as the DB model_id)");
        }
        if (embedding.kind == "http" && embedding.endpoint.empty()) {
            throw ValidationError("config: embedding.endpoint is required for the http backend");
        }
        if (embedding.kind == "replay" && embedding.fixture.empty()) {
            throw ValidationError("config: embedding.fixture is required for the replay backend");
        }
        if (embedding.batch_size == 0 || embedding.in_flight == 0) {
            throw ValidationError("config: embedding.batch_size and embedding.in_flight must be positive");
        }
    }
    const auto& gk = generation.kind;
    if (gk != "http-chat" && gk != "replay" && gk != "echo-gold") {
        throw ValidationError("config: unknown generation backend kind '" + gk + "'");
    }
    if (gk == "http-chat" && (generation.endpoint.empty() || generation.model.empty())) {
        throw ValidationError("config: generation.endpoint and generation.model are required for http-chat");
    }
    if (gk == "replay" && generation.fixture.empty()) {
        throw ValidationError("config: generation.fixture is required for the replay backend");
    }
    if (generation.in_flight == 0) {
        throw ValidationError("config: generation.in_flight must be positive");
    }
}

Json RunConfig::to_json() const {
    Json j;
    j["dataset"] = Json{{"kind", std::string(to_string(dataset.kind))},
                        {"train", str_or_empty(dataset.train)},
                        {"test", dataset.test.string()},
                        {"inventory", dataset.inventory ? Json(dataset.inventory->string()) : Json(nullptr)},
                        {"negative_label_semantics", dataset.negative_label_semantics}};
    if (!embedding.kind.empty()) {
        Json e = retry_to_json(embedding.retry);
        e["kind"] = embedding.kind;
        e["endpoint"] = embedding.endpoint;
        e["model"] = embedding.model;
        e["auth_env"] = embedding.auth_env;
        e["fixture"] = str_or_empty(embedding.fixture);
        e["batch_size"] = embedding.batch_size;
        e["in_flight"] = embedding.in_flight;
        e["timeout_s"] = embedding.timeout_s;
        j["embedding"] = std::move(e);
    }
    Json g = retry_to_json(generation.retry);
    g["kind"] = generation.kind;
    g["endpoint"] = generation.endpoint;
    g["model"] = generation.model;
    g["auth_env"] = generation.auth_env;
    g["fixture"] = str_or_empty(generation.fixture);
    g["timeout_s"] = generation.timeout_s;
    g["temperature"] = generation.params.temperature;
    g["max_new_tokens"] = generation.params.max_new_tokens;
    g["stop"] = generation.params.stop_sequences;
    g["in_flight"] = generation.in_flight;
    g["requests_per_minute"] = generation.requests_per_minute;
    j["generation"] = std::move(g);
    j["templates"] = Json{{"simple", simple_template}, {"rag", rag_template}};
    j["variant"] = std::string(to_string(variant));
    j["k"] = k;
    j["exclude_negative_examples"] = exclude_negative_examples;
    j["exclude_self_retrieval"] = exclude_self_retrieval;
    j["output_dir"] = output_dir.string();
    j["embedding_db"] = embedding_db.string();
    j["embedding_cache"] = embedding_cache.string();
    j["response_cache"] = response_cache.string();
    j["refine_rules"] = refine_rules ? Json(refine_rules->string()) : Json(nullptr);
    j["scoring_mode"] = std::string(to_string(scoring_mode));
    j["seed"] = seed;
    return j;
}

std::string RunConfig::digest() const { return sha256_hex(to_json().dump()); }

}  // namespace rag4re
