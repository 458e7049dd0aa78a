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

// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any criterion fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <random>
#include <sstream>

#include "mock_server.hpp"
#include "rag4re/common/digest.hpp"
#include "rag4re/evalkit/evalkit.hpp"
#include "rag4re/pipeline/pipeline.hpp"
#include "rag4re/refine/refine.hpp"
#include "support.hpp"

using namespace rag4re;
using namespace rag4re::testing;

namespace {

using Clock = std::chrono::steady_clock;

struct Check {
    std::ostringstream failures;
    bool ok = true;

    void expect(bool cond, const std::string& what) {
        if (!cond) {
            if (ok) failures << what;
            ok = false;
        }
    }
};

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

double ref_cosine(const std::vector<float>& a, const std::vector<float>& b) {
    double dot = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += double(a[i]) * double(b[i]);
        na += double(a[i]) * double(a[i]);
        nb += double(b[i]) * double(b[i]);
    }
    return dot / std::sqrt(na * nb);
}

// 1. top_k equals a compute-all-and-sort oracle, duplicates included.
Check retrieval_oracle() {
    Check c;
    const auto start = Clock::now();
    std::mt19937 rng(20261014);
    std::normal_distribution<float> dist;
    std::uniform_int_distribution<std::size_t> any(0, 999);
    std::vector<std::vector<float>> rows;
    EmbeddingDB db("acceptance", 16, "inv");
    for (std::size_t i = 0; i < 1000; ++i) {
        std::vector<float> v(16);
        if (i >= 100 && i % 10 == 0) {
            v = rows[any(rng) % i];
        } else {
            for (auto& x : v) x = dist(rng);
        }
        rows.push_back(v);
        db.add({"id" + std::to_string(i), "t", ""}, v);
    }
    std::size_t dup_ties = 0;
    for (std::size_t q = 0; q < 100; ++q) {
        std::vector<float> query(16);
        if (q % 4 == 0) {
            query = rows[(q * 10 + 100) % 1000];  // lands on a duplicated vector
        } else {
            for (auto& x : query) x = dist(rng);
        }
        std::vector<std::pair<double, std::size_t>> all;
        for (std::size_t i = 0; i < rows.size(); ++i) all.emplace_back(ref_cosine(query, rows[i]), i);
        std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
        if (all[0].first == all[1].first) ++dup_ties;
        for (std::size_t k : {1u, 5u}) {
            auto hits = db.top_k(query, k);
            c.expect(hits.size() == k, "short result");
            for (std::size_t r = 0; r < k && r < hits.size(); ++r) {
                c.expect(hits[r].instance_id == "id" + std::to_string(all[r].second),
                         "query " + std::to_string(q) + " k=" + std::to_string(k) + " rank " + std::to_string(r + 1));
            }
        }
    }
    c.expect(dup_ties > 0, "no tie case exercised");
    const double secs = seconds_since(start);
    c.expect(secs < 5.0, "took " + std::to_string(secs) + " s");
    return c;
}

// 2. Cosine symmetry, scale invariance, and the hand case.
Check cosine_properties() {
    Check c;
    std::mt19937 rng(2);
    std::normal_distribution<float> dist;
    std::uniform_real_distribution<float> lambda(1e-3f, 1e3f);
    std::uniform_int_distribution<int> dim(1, 64);
    for (int t = 0; t < 10000; ++t) {
        std::vector<float> a(dim(rng)), b(a.size());
        for (auto& x : a) x = dist(rng);
        for (auto& x : b) x = dist(rng);
        const double ab = cosine(a, b);
        c.expect(std::abs(ab - cosine(b, a)) <= 1e-6, "symmetry");
        const float l = lambda(rng);
        auto la = a;
        for (auto& x : la) x *= l;
        c.expect(std::abs(ab - cosine(la, b)) <= 1e-6, "scale invariance");
    }
    // Independent scalar arithmetic: dot = 1*3 + 2*2 + 3*1, both norms sqrt(1 + 4 + 9).
    const double expected = (1.0 * 3 + 2.0 * 2 + 3.0 * 1) / (std::sqrt(1.0 + 4 + 9) * std::sqrt(9.0 + 4 + 1));
    c.expect(std::abs(cosine(std::vector<float>{1, 2, 3}, std::vector<float>{3, 2, 1}) - expected) <= 1e-6,
             "(1,2,3)/(3,2,1)");
    return c;
}

// 3. Save/load is field-identical and two saves are bit-identical.
Check db_round_trip() {
    Check c;
    TempDir tmp;
    auto set = make_synthetic(64, 0);
    auto inv = builtin_inventory(DatasetKind::kTacred);
    Corpus train{Split::kTrain, set.train, inv};
    ReplayEmbeddingBackend replay("synthetic-16", set.vectors);
    EmbeddingCache cache;
    CachedEmbedder embedder(replay, cache);
    auto db = build_db(train, embedder);
    const auto a = save_db(db, tmp / "a.db");
    const auto b = save_db(db, tmp / "b.db");
    c.expect(a == b, "checksums differ");
    c.expect(read_file(tmp / "a.db") == read_file(tmp / "b.db"), "file bytes differ");
    auto loaded = load_db(tmp / "a.db");
    c.expect(loaded == db, "loaded DB differs");
    c.expect(save_db(loaded, tmp / "c.db") == a, "re-save checksum differs");
    c.expect(db_file_checksum(tmp / "a.db") == a, "trailer checksum");
    for (std::size_t i = 0; i < 8; ++i) {
        const auto& q = set.vectors.at(set.train[i].surface_text);
        c.expect(loaded.top_k(q, 3) == db.top_k(q, 3), "top_k after reload");
    }
    return c;
}

std::string fuzz(std::mt19937& rng, const LabelInventory& inv) {
    static const std::vector<std::string> bits{" ", "\"", "'", ".", ":", "(", ")", "no relation", "None", "founded",
                                               "title", "org:", "per:", "\xe2\x80\x9c", "\xff", "\n", "relation"};
    std::uniform_int_distribution<int> n(0, 7), kind(0, 3), byte(1, 255);
    std::uniform_int_distribution<std::size_t> bit(0, bits.size() - 1), label(0, inv.size() - 1);
    std::string s;
    for (int i = n(rng); i > 0; --i) {
        switch (kind(rng)) {
            case 0: s += inv.labels()[label(rng)]; break;
            case 1: s += restorable_suffix(inv.labels()[label(rng)]); break;
            case 2: s += static_cast<char>(byte(rng)); break;
            default: s += bits[bit(rng)]; break;
        }
    }
    return s;
}

// 4. Refinement fixtures, then totality and idempotence over fuzzed strings.
Check refinement() {
    Check c;
    auto inv = builtin_inventory(DatasetKind::kTacred);
    Refiner refiner(inv);
    struct Case {
        std::string raw;
        std::optional<std::string> label;
        Verdict verdict;
    };
    const std::vector<Case> fixtures{
        {"founded", "org:founded", Verdict::kRefined},
        {"no relation", "no_relation", Verdict::kRefined},
        {"per:title", "per:title", Verdict::kExact},
        {"employee_of", "per:employee_of", Verdict::kRefined},
        {"I cannot determine the relation.", std::nullopt, Verdict::kUnparseable},
    };
    for (const auto& f : fixtures) {
        auto p = refiner.refine_text("q", f.raw);
        c.expect(p.label == f.label && p.verdict == f.verdict, "fixture '" + f.raw + "'");
    }
    auto table = refinement_table(inv);
    c.expect(std::find(table.unique.begin(), table.unique.end(), std::pair<std::string, std::string>{"founded", "org:founded"}) !=
                 table.unique.end(),
             "refinement table row for 'founded'");

    std::mt19937 rng(4);
    for (int i = 0; i < 1000; ++i) {
        const auto raw = fuzz(rng, inv);
        try {
            auto p = refiner.refine_text("q", raw);
            c.expect(!p.label || inv.contains(*p.label), "label outside inventory");
            c.expect(p.label.has_value() == (p.verdict != Verdict::kUnparseable), "verdict/label mismatch");
            if (p.label) {
                auto again = refiner.refine_text("q", *p.label);
                c.expect(again.label == p.label && again.verdict == Verdict::kExact, "not idempotent");
            }
        } catch (const std::exception& e) {
            c.expect(false, std::string("refine threw: ") + e.what());
        }
    }
    return c;
}

// 5. Positive-micro against brute-force counting over all small assignments.
Check metric_oracle() {
    Check c;
    LabelInventory inv(DatasetKind::kCustom, {"neg", "x", "y"}, "neg", false);
    std::vector<std::optional<std::string>> preds{std::nullopt, "neg", "x", "y"};
    for (std::size_t n = 1; n <= 4; ++n) {
        std::size_t gs = 1, ps = 1;
        for (std::size_t i = 0; i < n; ++i) gs *= 3, ps *= preds.size();
        for (std::size_t g = 0; g < gs; ++g) {
            for (std::size_t p = 0; p < ps; ++p) {
                std::vector<InstanceOutcome> out;
                std::size_t tp = 0, fp = 0, fn = 0;
                for (std::size_t i = 0, gx = g, px = p; i < n; ++i, gx /= 3, px /= preds.size()) {
                    const auto& gold = inv.labels()[gx % 3];
                    const auto& pred = preds[px % preds.size()];
                    out.push_back({"i" + std::to_string(i), gold, pred, pred ? Verdict::kExact : Verdict::kUnparseable});
                    const bool right = pred && *pred == gold;
                    if (gold != "neg" && right) ++tp;
                    if (pred && *pred != "neg" && !right) ++fp;
                    if (gold != "neg" && !right) ++fn;
                }
                auto run = score_outcomes(out, inv, ScoringMode::kPositiveMicro);
                const double P = tp + fp ? double(tp) / double(tp + fp) : 0.0;
                const double R = tp + fn ? double(tp) / double(tp + fn) : 0.0;
                const double F = P + R > 0 ? 2 * P * R / (P + R) : 0.0;
                c.expect(run.tp_count == tp && run.fp_count == fp && run.fn_count == fn, "counts differ");
                c.expect(run.micro.precision == P && run.micro.recall == R && run.micro.f1 == F, "scores differ");
            }
        }
    }
    LabelInventory worked(DatasetKind::kCustom, {"no_relation", "per:age", "org:founded", "per:spouse"}, "no_relation",
                          false);
    std::vector<std::string> gold{"per:age", "no_relation", "org:founded", "per:age"};
    std::vector<std::string> pred{"per:age", "org:founded", "no_relation", "per:spouse"};
    std::vector<InstanceOutcome> out;
    for (std::size_t i = 0; i < 4; ++i) out.push_back({"w" + std::to_string(i), gold[i], pred[i], Verdict::kExact});
    auto run = score_outcomes(out, worked, ScoringMode::kPositiveMicro);
    const double third = 1.0 / 3.0;
    c.expect(run.micro.precision == third && run.micro.recall == third && run.micro.f1 == third, "worked example P/R/F1");
    c.expect(run.fp_count == 2 && run.fn_count == 2, "worked example fp/fn");
    return c;
}

std::map<std::string, std::string> digest_files(const std::filesystem::path& out, const RunArtifacts& art) {
    std::map<std::string, std::string> d;
    for (const auto& [f, _] : art.digests) d[f] = file_sha256_hex(out / f);
    d["manifest.json"] = file_sha256_hex(art.manifest_path);
    return d;
}

// 6. Deterministic end-to-end rag run with echo-gold.
Check end_to_end() {
    Check c;
    const auto start = Clock::now();
    TempDir tmp;
    auto set = make_synthetic(60, 24, 99);
    // The construction guarantee, checked independently: each test sentence's nearest training
    // sentence carries the same label.
    for (const auto& q : set.test) {
        const auto& qv = set.vectors.at(q.surface_text).values;
        double best = -2;
        std::string label;
        for (const auto& t : set.train) {
            const double s = ref_cosine(qv, set.vectors.at(t.surface_text).values);
            if (s > best) best = s, label = *t.gold_label;
        }
        c.expect(label == *q.gold_label, "synthetic construction broken for " + q.id);
    }
    auto cfg = write_workspace(tmp.path(), set);
    cfg["variant"] = "rag";
    auto config = RunConfig::load(write_config(tmp.path(), cfg));

    auto first = cmd_run(config);
    c.expect(first.variants.size() == 1 && first.variants[0].score.micro.f1 == 1.0, "rag F1 != 1.0");
    const auto d1 = digest_files(config.output_dir, first);
    auto warm = cmd_run(config);
    c.expect(digest_files(config.output_dir, warm) == d1, "warm rerun digests differ");
    std::filesystem::remove_all(config.output_dir);
    auto cold = cmd_run(config);
    c.expect(digest_files(config.output_dir, cold) == d1, "cold rerun digests differ");
    c.expect(cold.db_checksum == first.db_checksum, "DB checksum differs");
    const double secs = seconds_since(start);
    c.expect(secs < 30.0, "took " + std::to_string(secs) + " s");
    return c;
}

// 7. Interrupt a 100-prompt run after 50 completions; the rerun makes exactly 50 calls.
Check resumability() {
    Check c;
    for (std::size_t in_flight : {1u, 4u}) {
        TempDir tmp;
        auto set = make_synthetic(10, 100);
        auto cfg = write_workspace(tmp.path(), set);
        cfg["generation"]["in_flight"] = in_flight;
        auto config = RunConfig::load(write_config(tmp.path(), cfg));

        std::atomic<bool> stop{false};
        CountingBackend first([](const PromptBundle& b) { return "answer for " + b.query_id; });
        // The signal arrives while call 50 is running; calls already in flight are lost.
        first.on_call = [&](std::size_t n) {
            if (n == 50) stop = true;
            if (n > 50) throw BackendError("connection dropped by interrupt", 1, false);
        };
        PipelineHooks hooks;
        hooks.generation = &first;
        hooks.stop = &stop;
        bool interrupted = false;
        try {
            cmd_run(config, VariantSelection::kSimple, hooks);
        } catch (const InterruptedError&) {
            interrupted = true;
        }
        const auto tag = "in_flight=" + std::to_string(in_flight) + ": ";
        c.expect(interrupted, tag + "first run was not interrupted");

        CountingBackend second([](const PromptBundle& b) { return "answer for " + b.query_id; });
        hooks.generation = &second;
        hooks.stop = nullptr;
        auto art = cmd_run(config, VariantSelection::kSimple, hooks);
        c.expect(second.calls() == 50, tag + "rerun made " + std::to_string(second.calls()) + " calls");
        c.expect(art.variants[0].score.per_instance.size() == 100, tag + "rerun incomplete");
    }
    return c;
}

// 8. CLI `run --variant both` against HTTP chat and embedding endpoints over a TACRED-format
// corpus; every reported number is recomputed from the per-instance files.
Check live_endpoint_reports(const std::string& cli) {
    Check c;
    TempDir tmp;
    auto set = make_synthetic(40, 30, 5);
    MockServer embed("/v1/embeddings", [&](const nlohmann::json& req) -> MockServer::Reply {
        nlohmann::json vectors = nlohmann::json::array();
        for (const auto& t : req.at("texts")) vectors.push_back(set.vectors.at(t.get<std::string>()).values);
        return {200, nlohmann::json{{"vectors", vectors}}.dump()};
    });
    // Stand-in model: copies the example's label when the prompt has one, otherwise answers with a
    // bare relation name for queries on even ids and an unusable sentence for the rest.
    std::atomic<int> transient{3};
    MockServer chat("/v1/chat/completions", [&](const nlohmann::json& req) -> MockServer::Reply {
        if (transient-- > 0) return {503, "{}"};
        const auto prompt = req.at("messages").at(0).at("content").get<std::string>();
        const std::string marker = "relation between \"";
        auto ex = prompt.find("Here is a similar example");
        if (ex != std::string::npos) {
            auto colon = prompt.find("\": ", prompt.find(marker, ex));
            auto end = prompt.find(". Choose", colon);
            return {200, MockServer::chat_reply(prompt.substr(colon + 3, end - colon - 3))};
        }
        const bool even = prompt.find("Person") != std::string::npos &&
                          (prompt[prompt.find("Person") + 6] - '0') % 2 == 0;
        return {200, MockServer::chat_reply(even ? "founded" : "I am not sure.")};
    });

    auto cfg = write_workspace(tmp.path(), set);
    cfg["embedding"] = {{"kind", "http"}, {"endpoint", embed.url()}, {"model", "mock-embed"}, {"batch_size", 7}};
    cfg["generation"] = {{"kind", "http-chat"}, {"endpoint", chat.url()}, {"model", "mock-chat"}, {"backoff_ms", 1}};
    const auto config_path = write_config(tmp.path(), cfg);
    const std::string cmd = "\"" + cli + "\" -q run --config \"" + config_path.string() + "\" --variant both > \"" +
                            (tmp / "stdout.txt").string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    c.expect(WIFEXITED(status) && WEXITSTATUS(status) == 0, "CLI exit status " + std::to_string(status) + ": " +
                                                                (std::filesystem::exists(tmp / "stdout.txt") ? read_file(tmp / "stdout.txt") : ""));
    if (!c.ok) return c;

    const auto out = tmp / "out";
    const auto metrics = read_file(out / "metrics.md");
    const auto errors = read_file(out / "errors.md");
    c.expect(metrics.find("P(%)") < metrics.find("R(%)") && metrics.find("R(%)") < metrics.find("F1(%)"),
             "metrics table columns");
    c.expect(errors.find("FP") != std::string::npos && errors.find("FN") != std::string::npos, "error table columns");

    std::vector<ScoredRun> rescored;
    for (const char* variant : {"simple", "rag"}) {
        ScoreRequest req;
        req.predictions = out / variant / "predictions.jsonl";
        req.gold = tmp / "test.json";
        req.inventory = "tacred";
        req.run_id = variant;
        auto run = cmd_score(req);
        run.variant = parse_variant(variant);
        auto reported = Json::parse(read_file(out / variant / "score.json"));
        auto recomputed = Json::parse(run_to_json(run).dump());
        for (const char* k : {"precision", "recall", "f1"}) {
            c.expect(reported.at("micro").at(k) == recomputed.at("micro").at(k), std::string(variant) + " " + k);
        }
        for (const char* k : {"fp_count", "fn_count"}) {
            c.expect(reported.at(k) == recomputed.at(k), std::string(variant) + " " + k);
        }
        for (double v : {run.micro.precision, run.micro.recall, run.micro.f1}) {
            c.expect(metrics.find(format_percent(v)) != std::string::npos, std::string(variant) + " metrics.md value");
        }
        c.expect(errors.find(std::to_string(run.fp_count)) != std::string::npos, "errors.md fp");
        rescored.push_back(run);
    }
    c.expect(render_metrics_table(rescored) == metrics, "metrics.md differs from recomputation");
    c.expect(render_error_table(rescored) == errors, "errors.md differs from recomputation");
    auto cmp = compare_runs(rescored[0], rescored[1]);
    c.expect(render_report(cmp, ReportFormat::kJson) == read_file(out / "comparison.json"),
             "comparison.json differs from recomputation");
    c.expect(rescored[1].micro.f1 > rescored[0].micro.f1, "rag did not improve on the stand-in model");
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    std::string cli = argc > 1 ? argv[1] : "";
    struct Criterion {
        int id;
        const char* name;
        std::function<Check()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "retrieval oracle equivalence", retrieval_oracle},
        {2, "cosine correctness", cosine_properties},
        {3, "DB round-trip", db_round_trip},
        {4, "refinement table and fuzzing", refinement},
        {5, "metric oracle", metric_oracle},
        {6, "end-to-end deterministic run", end_to_end},
        {7, "resumability", resumability},
        {8, "reports from a live endpoint run", [&] { return live_endpoint_reports(cli); }},
    };
    int failed = 0;
    for (const auto& cr : criteria) {
        const auto start = Clock::now();
        Check result;
        try {
            result = cr.run();
        } catch (const std::exception& e) {
            result.expect(false, std::string("exception: ") + e.what());
        }
        char line[256];
        std::snprintf(line, sizeof line, "%s criterion %d: %s (%.2f s)", result.ok ? "PASS" : "FAIL", cr.id, cr.name,
                      seconds_since(start));
        std::cout << line;
        if (!result.ok) {
            std::cout << " -- " << result.failures.str();
            ++failed;
        }
        std::cout << std::endl;
    }
    std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
    return failed == 0 ? 0 : 1;
}
