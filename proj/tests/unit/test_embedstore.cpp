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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "rag4re/common/digest.hpp"
#include "rag4re/embedstore/embedding_backend.hpp"
#include "rag4re/embedstore/vector_db.hpp"
#include "mock_server.hpp"
#include "support.hpp"

using namespace rag4re;
using rag4re::testing::TempDir;

namespace {

double oracle_cosine(const std::vector<float>& a, const std::vector<float>& b) {
    double dot = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += double(a[i]) * b[i];
        na += double(a[i]) * a[i];
        nb += double(b[i]) * b[i];
    }
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

EmbeddingDB random_db(std::mt19937& rng, std::size_t n, std::size_t dim) {
    std::normal_distribution<float> dist;
    EmbeddingDB db("test-model", dim, "inv");
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<float> v(dim);
        for (auto& x : v) x = dist(rng);
        db.add({"id" + std::to_string(i), "text " + std::to_string(i), i % 3 ? "per:age" : ""}, v);
    }
    return db;
}

}  // namespace

TEST_CASE("cosine examples") {
    CHECK(cosine(std::vector<float>{1, 0}, std::vector<float>{1, 0}) == doctest::Approx(1.0));
    CHECK(cosine(std::vector<float>{1, 0}, std::vector<float>{0, 1}) == doctest::Approx(0.0));
    // 10 / (sqrt(14) * sqrt(14))
    const double expected = 10.0 / 14.0;
    CHECK(std::abs(cosine(std::vector<float>{1, 2, 3}, std::vector<float>{3, 2, 1}) - expected) <= 1e-6);
    CHECK_THROWS_AS(cosine(std::vector<float>{1, 0}, std::vector<float>{1, 0, 0}), ValidationError);
    CHECK_THROWS_AS(cosine(std::vector<float>{0, 0}, std::vector<float>{1, 0}), ValidationError);
}

TEST_CASE("cosine symmetry and positive-scale invariance") {
    std::mt19937 rng(11);
    std::normal_distribution<float> dist;
    std::uniform_real_distribution<float> scale(0.01f, 100.0f);
    for (int t = 0; t < 500; ++t) {
        std::vector<float> a(1 + t % 40), b(a.size());
        for (auto& x : a) x = dist(rng);
        for (auto& x : b) x = dist(rng);
        const double ab = cosine(a, b);
        CHECK(std::abs(ab - cosine(b, a)) <= 1e-6);
        CHECK(std::abs(ab - oracle_cosine(a, b)) <= 1e-9);
        const float l = scale(rng);
        auto la = a;
        for (auto& x : la) x *= l;
        CHECK(std::abs(ab - cosine(la, b)) <= 1e-6);
        CHECK(ab <= 1.0);
        CHECK(ab >= -1.0);
    }
}

TEST_CASE("top_k examples") {
    EmbeddingDB db("m", 2, "inv");
    db.add({"id1", "a", ""}, std::vector<float>{1, 0});
    db.add({"id2", "b", ""}, std::vector<float>{0, 1});
    auto hits = db.top_k(std::vector<float>{1, 0}, 1);
    REQUIRE(hits.size() == 1);
    CHECK(hits[0].instance_id == "id1");
    CHECK(hits[0].score == doctest::Approx(1.0));
    CHECK(hits[0].rank == 1);

    SUBCASE("ties go to the lower entry index") {
        EmbeddingDB dup("m", 2, "inv");
        dup.add({"x", "a", ""}, std::vector<float>{0.5f, 0.5f});
        dup.add({"first", "b", ""}, std::vector<float>{1, 1});
        dup.add({"second", "c", ""}, std::vector<float>{1, 1});
        auto h = dup.top_k(std::vector<float>{1, 1}, 1);
        CHECK(h[0].instance_id == "x");
        auto all = dup.top_k(std::vector<float>{1, 1}, 3);
        CHECK(all[1].instance_id == "first");
        CHECK(all[2].instance_id == "second");
    }

    SUBCASE("exclusion") {
        auto h = db.top_k(std::vector<float>{1, 0}, 1, [](std::size_t i) { return i == 0; });
        REQUIRE(h.size() == 1);
        CHECK(h[0].instance_id == "id2");
        CHECK(db.top_k(std::vector<float>{1, 0}, 2, [](std::size_t) { return true; }).empty());
    }

    SUBCASE("errors") {
        EmbeddingDB empty("m", 2, "inv");
        CHECK_THROWS_AS(empty.top_k(std::vector<float>{1, 0}, 1), ValidationError);
        CHECK_THROWS_AS(db.top_k(std::vector<float>{1, 0, 0}, 1), ValidationError);
        CHECK_THROWS_AS(db.top_k(std::vector<float>{1, 0}, 0), ValidationError);
        CHECK_THROWS_AS(db.top_k(std::vector<float>{1, 0}, 3), ValidationError);
        CHECK_THROWS_AS(db.top_k(std::vector<float>{0, 0}, 1), ValidationError);
    }

    SUBCASE("add validation") {
        CHECK_THROWS_AS(db.add({"id1", "dup", ""}, std::vector<float>{1, 1}), ValidationError);
        CHECK_THROWS_AS(db.add({"id3", "x", ""}, std::vector<float>{1, 1, 1}), ValidationError);
        CHECK_THROWS_AS(db.add({"id3", "x", ""}, std::vector<float>{0, 0}), ValidationError);
        CHECK_THROWS_AS(db.add({"id3", "x", ""}, std::vector<float>{NAN, 1}), ValidationError);
    }
}

TEST_CASE("top_k matches a full-sort oracle and is invariant under query rescaling") {
    std::mt19937 rng(5);
    auto db = random_db(rng, 700, 16);
    std::normal_distribution<float> dist;
    for (int q = 0; q < 20; ++q) {
        std::vector<float> query(16);
        for (auto& x : query) x = dist(rng);
        std::vector<std::pair<double, std::size_t>> all;
        for (std::size_t i = 0; i < db.size(); ++i) {
            auto v = db.vector(i);
            all.emplace_back(oracle_cosine(query, std::vector<float>(v.begin(), v.end())), i);
        }
        std::sort(all.begin(), all.end(), [](auto& a, auto& b) { return a.first != b.first ? a.first > b.first : a.second < b.second; });
        auto hits = db.top_k(query, 5);
        REQUIRE(hits.size() == 5);
        for (std::size_t r = 0; r < 5; ++r) {
            CHECK(hits[r].entry_index == all[r].second);
            CHECK(hits[r].rank == r + 1);
        }
        auto scaled = query;
        for (auto& x : scaled) x *= 3.5f;
        auto hits2 = db.top_k(scaled, 5);
        for (std::size_t r = 0; r < 5; ++r) CHECK(hits2[r].instance_id == hits[r].instance_id);
    }
}

TEST_CASE("DB file round-trip") {
    TempDir tmp;
    std::mt19937 rng(9);
    auto db = random_db(rng, 50, 7);
    const auto c1 = save_db(db, tmp / "a.db");
    const auto c2 = save_db(db, tmp / "b.db");
    CHECK(c1 == c2);
    CHECK(read_file(tmp / "a.db") == read_file(tmp / "b.db"));
    CHECK(db_file_checksum(tmp / "a.db") == c1);
    auto loaded = load_db(tmp / "a.db");
    CHECK(loaded == db);
    std::vector<float> q{1, -1, 0.5f, 0, 2, 1, 1};
    CHECK(loaded.top_k(q, 4) == db.top_k(q, 4));

    const auto bytes = serialize_db(db);
    SUBCASE("wrong magic") {
        auto bad = bytes;
        bad[0] = 'X';
        CHECK_THROWS(parse_db(bad));
    }
    SUBCASE("other version") {
        auto bad = bytes;
        bad[7] = '2';
        CHECK_THROWS_WITH(parse_db(bad), doctest::Contains("version"));
    }
    SUBCASE("truncated") {
        for (std::size_t cut : {std::size_t{3}, std::size_t{10}, bytes.size() / 2, bytes.size() - 33}) {
            CHECK_THROWS_WITH(parse_db(std::string_view(bytes).substr(0, cut)), doctest::Contains("byte offset"));
        }
    }
    SUBCASE("flipped payload bit fails the checksum") {
        auto bad = bytes;
        bad[bytes.size() - 40] ^= 1;
        CHECK_THROWS(parse_db(bad));
    }
    SUBCASE("trailing garbage") { CHECK_THROWS(parse_db(bytes + "x")); }
}

TEST_CASE("embed_texts and the replay backend") {
    ReplayEmbeddingBackend replay("m", {{"a", {{1, 0}}}, {"b", {{0, 1}}}});
    std::vector<std::string> texts{"a", "b"};
    auto out = embed_texts(texts, replay);
    REQUIRE(out.size() == 2);
    CHECK(out[0].values == std::vector<float>{1, 0});
    CHECK(out[1].values == std::vector<float>{0, 1});
    CHECK_THROWS_AS(embed_texts(std::vector<std::string>{}, replay), ValidationError);
    CHECK_THROWS_AS(embed_texts(std::vector<std::string>{""}, replay), ValidationError);
    CHECK_THROWS_AS(embed_texts(std::vector<std::string>{"zzz"}, replay), BackendError);

    ReplayEmbeddingBackend ragged("m", {{"a", {{1, 0}}}, {"b", {{0, 1, 1}}}});
    CHECK_THROWS_AS(embed_texts(texts, ragged), BackendError);
}

TEST_CASE("embedding cache persists and detects version mismatches") {
    TempDir tmp;
    const auto path = tmp / "cache.jsonl";
    {
        EmbeddingCache cache(path);
        cache.insert("m", "hello", {{1, 2, 3}});
        CHECK(cache.lookup("m", "hello")->values == std::vector<float>{1, 2, 3});
        CHECK_FALSE(cache.lookup("other-model", "hello"));
    }
    EmbeddingCache reopened(path);
    CHECK(reopened.size() == 1);
    CHECK(reopened.lookup("m", "hello").has_value());

    write_file_atomic(tmp / "old.jsonl", "{\"rag4re_embedding_cache\":99}\n");
    CHECK_THROWS_WITH(EmbeddingCache(tmp / "old.jsonl"), doctest::Contains("rebuild"));
}

TEST_CASE("build_db counting, determinism and errors") {
    std::vector<RelationInstance> inst;
    std::unordered_map<std::string, EmbeddingVector> table;
    for (int i = 0; i < 3; ++i) {
        inst.push_back(rag4re::testing::make_instance("s" + std::to_string(i), {"w" + std::to_string(i), "and", "v"},
                                                      {0, 0}, {2, 2}, "per:age"));
        table[inst.back().surface_text] = EmbeddingVector{{float(i + 1), 1.0f}};
    }
    auto inv = builtin_inventory(DatasetKind::kTacred);
    Corpus corpus{Split::kTrain, inst, inv};
    rag4re::testing::TableEmbeddingBackend backend("m", table);
    EmbeddingCache cache;
    CachedEmbedder embedder(backend, cache);
    BuildOptions opts;
    opts.batch_size = 2;
    auto db = build_db(corpus, embedder, opts);
    CHECK(db.size() == 3);
    CHECK(backend.calls() == 2);
    CHECK(db.inventory_digest() == inv.digest());
    CHECK(db.entry(2).instance_id == "s2");

    auto again = build_db(corpus, embedder, opts);
    CHECK(backend.calls() == 2);
    CHECK(serialize_db(again) == serialize_db(db));

    Corpus test_split{Split::kTest, inst, inv};
    CHECK_THROWS(build_db(test_split, embedder, opts));
    Corpus dup{Split::kTrain, {inst[0], inst[0]}, inv};
    CHECK_THROWS(build_db(dup, embedder, opts));

    rag4re::testing::TableEmbeddingBackend partial("m2", {{inst[0].surface_text, {{1, 0}}}});
    EmbeddingCache cache2;
    CachedEmbedder failing(partial, cache2);
    CHECK_THROWS_WITH(build_db(corpus, failing, opts), doctest::Contains("[batch ids 's0'..'s1']"));
}

TEST_CASE("HTTP embedding backend against a local server") {
    std::atomic<int> transient{1};
    rag4re::testing::MockServer server("/embed", [&](const nlohmann::json& req) -> rag4re::testing::MockServer::Reply {
        if (transient-- > 0) return {500, "{}"};
        if (req.at("model") != "mini") return {400, "{}"};
        nlohmann::json vectors = nlohmann::json::array();
        for (const auto& t : req.at("texts")) vectors.push_back({float(t.get<std::string>().size()), 1.0f});
        if (req.at("texts").size() == 3) vectors.erase(vectors.begin());
        return {200, nlohmann::json{{"vectors", vectors}}.dump()};
    });
    HttpEmbeddingConfig cfg;
    cfg.endpoint = server.url();
    cfg.model = "mini";
    cfg.retry.base_backoff = std::chrono::milliseconds(1);
    HttpEmbeddingBackend backend(cfg);
    std::vector<std::string> texts{"a", "bbb"};
    auto out = embed_texts(texts, backend);
    REQUIRE(out.size() == 2);
    CHECK(out[1].values == std::vector<float>{3, 1});
    CHECK(server.requests() == 2);
    CHECK_THROWS_AS(embed_texts(std::vector<std::string>{"a", "b", "c"}, backend), BackendError);

    cfg.model = "other";
    HttpEmbeddingBackend rejected(cfg);
    try {
        embed_texts(texts, rejected);
        FAIL("expected BackendError");
    } catch (const BackendError& e) {
        CHECK_FALSE(e.retryable());
    }
}
