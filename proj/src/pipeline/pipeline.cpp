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

#include "rag4re/pipeline/pipeline.hpp"

#include <condition_variable>
#include <deque>
#include <mutex>
#include <thread>

#include "rag4re/common/digest.hpp"
#include "rag4re/common/error.hpp"
#include "rag4re/refine/refine.hpp"

namespace rag4re {

namespace {

template <typename T>
class BoundedQueue {
 public:
    explicit BoundedQueue(std::size_t capacity) : capacity_(capacity) {}

    bool push(T item) {
        std::unique_lock lock(mu_);
        not_full_.wait(lock, [&] { return closed_ || items_.size() < capacity_; });
        if (closed_) return false;
        items_.push_back(std::move(item));
        not_empty_.notify_one();
        return true;
    }

    std::optional<T> pop() {
        std::unique_lock lock(mu_);
        not_empty_.wait(lock, [&] { return closed_ || !items_.empty(); });
        if (items_.empty()) return std::nullopt;
        T item = std::move(items_.front());
        items_.pop_front();
        not_full_.notify_one();
        return item;
    }

    void close() {
        std::lock_guard lock(mu_);
        closed_ = true;
        not_full_.notify_all();
        not_empty_.notify_all();
    }

 private:
    std::size_t capacity_;
    std::deque<T> items_;
    bool closed_ = false;
    std::mutex mu_;
    std::condition_variable not_full_;
    std::condition_variable not_empty_;
};

void log(const PipelineHooks& hooks, const std::string& msg) {
    if (hooks.log) hooks.log(msg);
}

std::unique_ptr<EmbeddingBackend> make_embedding_backend(const EmbeddingConfig& c) {
    if (c.kind == "replay") {
        return ReplayEmbeddingBackend::from_file(c.model, c.fixture);
    }
    HttpEmbeddingConfig h;
    h.endpoint = c.endpoint;
    h.model = c.model;
    h.auth_env = c.auth_env;
    h.http.read_timeout = std::chrono::seconds(c.timeout_s);
    h.retry = c.retry;
    return std::make_unique<HttpEmbeddingBackend>(std::move(h));
}

std::unique_ptr<GenerationBackend> make_generation_backend(const GenerationConfig& c) {
    if (c.kind == "replay") {
        return ReplayGenerationBackend::from_file(c.fixture);
    }
    if (c.kind == "echo-gold") {
        return std::make_unique<EchoGoldBackend>();
    }
    HttpChatConfig h;
    h.endpoint = c.endpoint;
    h.model = c.model;
    h.auth_env = c.auth_env;
    h.http.read_timeout = std::chrono::seconds(c.timeout_s);
    return std::make_unique<HttpChatBackend>(std::move(h));
}

LabelInventory config_inventory(const RunConfig& config) {
    if (config.dataset.inventory) {
        return load_inventory(*config.dataset.inventory);
    }
    return builtin_inventory(config.dataset.kind);
}

Corpus load_train(const RunConfig& config, const LabelInventory& inventory) {
    if (config.dataset.train.empty()) {
        throw ValidationError("dataset.train is not configured");
    }
    return load_corpus(config.dataset.train, inventory, Split::kTrain);
}

// A custom inventory may grow while loading, so the DB and the scorer use the train corpus' copy.
struct Datasets {
    std::optional<Corpus> train;
    Corpus test;
};

Datasets load_datasets(const RunConfig& config, bool need_train) {
    auto inventory = config_inventory(config);
    std::optional<Corpus> train;
    if (need_train) {
        train = load_train(config, inventory);
        inventory = train->inventory;
    }
    auto test = load_corpus(config.dataset.test, inventory, Split::kTest);
    return Datasets{std::move(train), std::move(test)};
}

struct EmbeddingSide {
    std::unique_ptr<EmbeddingBackend> owned;
    EmbeddingBackend* backend = nullptr;
    std::unique_ptr<EmbeddingCache> cache;
    std::unique_ptr<CachedEmbedder> embedder;
};

EmbeddingSide open_embedding(const RunConfig& config, const PipelineHooks& hooks) {
    EmbeddingSide side;
    if (hooks.embedding != nullptr) {
        side.backend = hooks.embedding;
    } else {
        side.owned = make_embedding_backend(config.embedding);
        side.backend = side.owned.get();
    }
    side.cache = std::make_unique<EmbeddingCache>(config.embedding_cache);
    side.embedder = std::make_unique<CachedEmbedder>(*side.backend, *side.cache);
    return side;
}

IndexResult build_and_save(const RunConfig& config, const Corpus& train, CachedEmbedder& embedder,
                           const PipelineHooks& hooks) {
    BuildOptions opts;
    opts.batch_size = config.embedding.batch_size;
    opts.in_flight = config.embedding.in_flight;
    opts.progress = [&](std::size_t done, std::size_t total) {
        log(hooks, "index: embedded " + std::to_string(done) + "/" + std::to_string(total));
    };
    const auto calls_before = embedder.backend_calls();
    auto db = build_db(train, embedder, opts);
    IndexResult r;
    r.db_path = config.embedding_db;
    r.checksum = save_db(db, config.embedding_db);
    r.entries = db.size();
    r.backend_calls = embedder.backend_calls() - calls_before;
    log(hooks, "index: wrote " + config.embedding_db.string() + " (" + std::to_string(r.entries) + " entries, sha256 " +
                   r.checksum + ")");
    return r;
}

void check_db_compatible(const EmbeddingDB& db, const RunConfig& config, const LabelInventory& inventory) {
    if (db.model_id() != config.embedding.model) {
        throw ValidationError("embedding DB " + config.embedding_db.string() + " was built with model '" +
                              db.model_id() + "', config uses '" + config.embedding.model + "'; re-run index");
    }
    if (db.inventory_digest() != inventory.digest()) {
        throw ValidationError("embedding DB " + config.embedding_db.string() +
                              " was built against a different label inventory; re-run index");
    }
}

std::optional<std::string> opt_field(const Json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<std::string>();
}

OrderedJson opt_json(const std::optional<std::string>& v) { return v ? OrderedJson(*v) : OrderedJson(nullptr); }

struct WorkItem {
    std::size_t index = 0;
    PromptBundle bundle;
};

struct WorkResult {
    PromptBundle bundle;
    RawResponse raw;
    RefinedPrediction refined;
};

struct VariantContext {
    const RunConfig& config;
    const std::string& config_digest;
    const Corpus& test;
    const Corpus* train = nullptr;
    const EmbeddingDB* db = nullptr;
    CachedEmbedder* embedder = nullptr;
    GenerationBackend& backend;
    ResponseCache& cache;
    const Refiner& refiner;
    const LabelInventory& scoring_inventory;
    const std::optional<std::string>& db_checksum;
    const PipelineHooks& hooks;
};

VariantArtifacts run_variant(PromptVariant variant, const VariantContext& ctx) {
    const auto& config = ctx.config;
    const auto dir = config.output_dir / std::string(to_string(variant));
    std::filesystem::create_directories(dir);
    const auto tmpl = load_template(variant == PromptVariant::kRag ? config.rag_template : config.simple_template);
    if (tmpl.variant() != variant) {
        throw ValidationError("template '" + tmpl.id() + "' is not a " + std::string(to_string(variant)) + " template");
    }

    GeneratorOptions gen_opts;
    gen_opts.retry = config.generation.retry;
    gen_opts.requests_per_minute = config.generation.requests_per_minute;
    gen_opts.stop = ctx.hooks.stop;
    Generator generator(ctx.backend, &ctx.cache, config.generation.params, gen_opts);

    JsonlWriter prompts(dir / "prompts.jsonl", JsonlWriter::Mode::kTruncate);
    JsonlWriter responses(dir / "responses.jsonl", JsonlWriter::Mode::kTruncate);
    JsonlWriter predictions(dir / "predictions.jsonl", JsonlWriter::Mode::kTruncate);
    JsonlWriter timings(dir / "timings.jsonl", JsonlWriter::Mode::kTruncate);

    const auto n = ctx.test.instances.size();
    std::vector<std::optional<WorkResult>> results(n);
    std::vector<RefinedPrediction> committed;
    committed.reserve(n);
    std::size_t next_commit = 0;
    std::mutex commit_mu;
    std::atomic<bool> abort{false};
    std::exception_ptr first_error;
    std::mutex error_mu;
    auto record_error = [&](std::exception_ptr e) {
        std::lock_guard lock(error_mu);
        if (!first_error) first_error = e;
        abort = true;
    };
    auto stopped = [&] { return abort.load() || (ctx.hooks.stop != nullptr && ctx.hooks.stop->load()); };

    auto commit = [&](std::size_t index, WorkResult r) {
        std::lock_guard lock(commit_mu);
        results[index] = std::move(r);
        while (next_commit < n && results[next_commit]) {
            auto& w = *results[next_commit];
            OrderedJson p;
            p["config_digest"] = ctx.config_digest;
            p["query_id"] = w.bundle.query_id;
            p["variant"] = std::string(to_string(w.bundle.variant));
            p["template_id"] = w.bundle.template_id;
            p["example_id"] = opt_json(w.bundle.example_id);
            p["example_score"] = w.bundle.example_id ? OrderedJson(w.bundle.example_score) : OrderedJson(nullptr);
            p["label_order_digest"] = w.bundle.label_order_digest;
            p["prompt_digest"] = w.bundle.prompt_digest;
            p["text"] = w.bundle.text;
            prompts.write(p);

            OrderedJson resp;
            resp["config_digest"] = ctx.config_digest;
            resp["query_id"] = w.raw.query_id;
            resp["backend_id"] = w.raw.backend_id;
            resp["prompt_digest"] = w.raw.prompt_digest;
            resp["text"] = w.raw.text;
            responses.write(resp);

            OrderedJson t;
            t["query_id"] = w.raw.query_id;
            t["latency_ms"] = w.raw.latency_ms;
            t["from_cache"] = w.raw.from_cache;
            timings.write(t);

            const auto& inst = ctx.test.instances[next_commit];
            OrderedJson pred;
            pred["config_digest"] = ctx.config_digest;
            pred["query_id"] = w.refined.query_id;
            pred["gold"] = opt_json(inst.gold_label);
            pred["predicted"] = opt_json(w.refined.label);
            pred["verdict"] = std::string(to_string(w.refined.verdict));
            pred["rule_trace"] = w.refined.rule_trace;
            pred["raw_text"] = w.refined.raw_text;
            predictions.write(pred);

            committed.push_back(std::move(w.refined));
            results[next_commit].reset();
            ++next_commit;
        }
    };

    const std::size_t workers = std::max<std::size_t>(1, config.generation.in_flight);
    BoundedQueue<WorkItem> queue(2 * workers);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            while (auto item = queue.pop()) {
                if (stopped()) continue;
                try {
                    WorkResult r;
                    r.raw = generator.generate(item->bundle);
                    r.refined = ctx.refiner.refine(r.raw);
                    r.bundle = std::move(item->bundle);
                    commit(item->index, std::move(r));
                } catch (...) {
                    record_error(std::current_exception());
                }
            }
        });
    }

    // Retrieval and rendering run here, overlapping with generation in the pool.
    try {
        std::vector<bool> negative_entry;
        if (ctx.db != nullptr && config.exclude_negative_examples) {
            negative_entry.resize(ctx.db->size());
            for (std::size_t i = 0; i < ctx.db->size(); ++i) {
                negative_entry[i] = ctx.scoring_inventory.is_negative(ctx.db->entry(i).gold_label) ||
                                    ctx.refiner.inventory().is_negative(ctx.db->entry(i).gold_label);
            }
        }
        const std::size_t batch = variant == PromptVariant::kRag ? config.embedding.batch_size : n;
        for (std::size_t begin = 0; begin < n && !stopped(); begin += batch) {
            const std::size_t end = std::min(n, begin + batch);
            std::vector<EmbeddingVector> query_vectors;
            if (variant == PromptVariant::kRag) {
                std::vector<std::string> texts;
                for (std::size_t i = begin; i < end; ++i) texts.push_back(ctx.test.instances[i].surface_text);
                query_vectors = ctx.embedder->embed(texts);
                if (!query_vectors.empty() && query_vectors.front().dim() != ctx.db->dim()) {
                    throw ValidationError("query embedding dimension " + std::to_string(query_vectors.front().dim()) +
                                          " does not match embedding DB dimension " + std::to_string(ctx.db->dim()));
                }
            }
            for (std::size_t i = begin; i < end && !stopped(); ++i) {
                const auto& query = ctx.test.instances[i];
                WorkItem item;
                item.index = i;
                if (variant == PromptVariant::kSimple) {
                    item.bundle = render_simple(query, ctx.refiner.inventory(), tmpl);
                } else {
                    std::optional<std::size_t> self;
                    if (config.exclude_self_retrieval) self = ctx.db->index_of(query.id);
                    EmbeddingDB::Exclusion excluded;
                    if (self || !negative_entry.empty()) {
                        excluded = [&, self](std::size_t e) {
                            return (self && e == *self) || (!negative_entry.empty() && negative_entry[e]);
                        };
                    }
                    const auto hits =
                        ctx.db->top_k(query_vectors[i - begin], std::min(config.k, ctx.db->size()), excluded);
                    if (hits.empty()) {
                        throw ValidationError("no retrievable example for query '" + query.id +
                                              "' after applying exclusion flags");
                    }
                    const auto* example = ctx.train->find(hits.front().instance_id);
                    if (example == nullptr) {
                        throw ValidationError("embedding DB entry '" + hits.front().instance_id +
                                              "' is not in the training corpus; re-run index");
                    }
                    item.bundle = render_rag(query, *example, ctx.refiner.inventory(), tmpl);
                    item.bundle.example_score = hits.front().score;
                }
                if (!queue.push(std::move(item))) break;
            }
            log(ctx.hooks, std::string(to_string(variant)) + ": queued " + std::to_string(end) + "/" +
                               std::to_string(n));
        }
    } catch (...) {
        record_error(std::current_exception());
    }
    queue.close();
    for (auto& t : pool) t.join();

    if (first_error) {
        log(ctx.hooks, std::string(to_string(variant)) + ": stopped after " + std::to_string(next_commit) +
                           " committed instances");
        try {
            std::rethrow_exception(first_error);
        } catch (const InterruptedError&) {
            throw;
        } catch (const Error&) {
            if (ctx.hooks.stop != nullptr && ctx.hooks.stop->load()) {
                throw InterruptedError("run interrupted after " + std::to_string(next_commit) + " instances");
            }
            throw;
        }
    }
    if (ctx.hooks.stop != nullptr && ctx.hooks.stop->load() && next_commit < n) {
        throw InterruptedError("run interrupted after " + std::to_string(next_commit) + " instances");
    }

    VariantArtifacts out;
    out.variant = variant;
    out.dir = dir;
    out.backend_calls = generator.backend_calls();
    Corpus scoring_gold{ctx.test.split, ctx.test.instances, ctx.scoring_inventory};
    out.score = score_run(committed, scoring_gold, config.scoring_mode);
    out.score.run_id = std::string(to_string(variant));
    out.score.variant = variant;

    OrderedJson run;
    run["run_id"] = out.score.run_id;
    run["variant"] = std::string(to_string(variant));
    run["config_digest"] = ctx.config_digest;
    run["db_checksum"] = variant == PromptVariant::kRag ? opt_json(ctx.db_checksum) : OrderedJson(nullptr);
    run["template_id"] = tmpl.id();
    run["backend_id"] = ctx.backend.id();
    run["decode_params"] = OrderedJson::parse(config.generation.params.to_json().dump());
    run["scoring_mode"] = std::string(to_string(config.scoring_mode));
    run["instances"] = n;
    run["inventory"] = OrderedJson::parse(ctx.refiner.inventory().to_json().dump());
    run["scoring_inventory"] = OrderedJson::parse(ctx.scoring_inventory.to_json().dump());
    write_file_atomic(dir / "run.json", run.dump(2) + "\n");
    for (auto fmt : {ReportFormat::kJson, ReportFormat::kCsv, ReportFormat::kMarkdown}) {
        emit_report(out.score, fmt, dir / ("score" + std::string(extension(fmt))));
    }
    log(ctx.hooks, std::string(to_string(variant)) + ": P=" + format_percent(out.score.micro.precision) +
                       " R=" + format_percent(out.score.micro.recall) + " F1=" + format_percent(out.score.micro.f1));
    return out;
}

}  // namespace

IndexResult cmd_index(const RunConfig& config, const PipelineHooks& hooks) {
    config.validate(VariantSelection::kRag);
    auto inventory = config_inventory(config);
    const auto train = load_train(config, inventory);
    auto side = open_embedding(config, hooks);
    return build_and_save(config, train, *side.embedder, hooks);
}

RunArtifacts cmd_run(const RunConfig& config, std::optional<VariantSelection> variant_override,
                     const PipelineHooks& hooks) {
    const auto selection = variant_override.value_or(config.variant);
    config.validate(selection);
    const bool want_simple = selection != VariantSelection::kRag;
    const bool want_rag = selection != VariantSelection::kSimple;

    std::filesystem::create_directories(config.output_dir);
    RunArtifacts artifacts;
    const auto snapshot = config.to_json();
    artifacts.config_digest = sha256_hex(snapshot.dump());
    write_file_atomic(config.output_dir / "config.snapshot.json", snapshot.dump(2) + "\n");

    auto data = load_datasets(config, want_rag);
    const auto& refine_inventory = data.test.inventory;
    const auto scoring_inventory =
        config.dataset.negative_label_semantics ? refine_inventory : refine_inventory.without_negative();
    const Refiner refiner(refine_inventory,
                          config.refine_rules ? RefineRules::load(*config.refine_rules) : RefineRules::defaults());

    EmbeddingSide side;
    std::optional<EmbeddingDB> db;
    if (want_rag) {
        side = open_embedding(config, hooks);
        if (std::filesystem::exists(config.embedding_db)) {
            db = load_db(config.embedding_db);
            check_db_compatible(*db, config, data.train->inventory);
            artifacts.db_checksum = db_file_checksum(config.embedding_db);
            log(hooks, "run: using embedding DB " + config.embedding_db.string());
        } else {
            artifacts.db_checksum = build_and_save(config, *data.train, *side.embedder, hooks).checksum;
            db = load_db(config.embedding_db);
        }
    }

    std::unique_ptr<GenerationBackend> owned_backend;
    GenerationBackend* backend = hooks.generation;
    if (backend == nullptr) {
        owned_backend = make_generation_backend(config.generation);
        backend = owned_backend.get();
    }
    ResponseCache cache(config.response_cache);

    VariantContext ctx{config,
                       artifacts.config_digest,
                       data.test,
                       data.train ? &*data.train : nullptr,
                       db ? &*db : nullptr,
                       side.embedder.get(),
                       *backend,
                       cache,
                       refiner,
                       scoring_inventory,
                       artifacts.db_checksum,
                       hooks};
    if (want_simple) artifacts.variants.push_back(run_variant(PromptVariant::kSimple, ctx));
    if (want_rag) artifacts.variants.push_back(run_variant(PromptVariant::kRag, ctx));

    std::vector<std::string> files{"config.snapshot.json"};
    for (const auto& v : artifacts.variants) {
        const auto name = std::string(to_string(v.variant));
        for (const char* f : {"prompts.jsonl", "responses.jsonl", "predictions.jsonl", "run.json", "score.json",
                              "score.csv", "score.md"}) {
            files.push_back(name + "/" + f);
        }
    }
    std::vector<ScoredRun> runs;
    for (const auto& v : artifacts.variants) runs.push_back(v.score);
    write_file_atomic(config.output_dir / "metrics.md", render_metrics_table(runs));
    write_file_atomic(config.output_dir / "errors.md", render_error_table(runs));
    files.emplace_back("metrics.md");
    files.emplace_back("errors.md");
    if (artifacts.variants.size() == 2) {
        artifacts.comparison = compare_runs(artifacts.variants[0].score, artifacts.variants[1].score);
        for (auto fmt : {ReportFormat::kJson, ReportFormat::kCsv, ReportFormat::kMarkdown}) {
            const auto name = "comparison" + std::string(extension(fmt));
            emit_report(*artifacts.comparison, fmt, config.output_dir / name);
            files.push_back(name);
        }
    }
    for (const auto& f : files) {
        artifacts.digests[f] = file_sha256_hex(config.output_dir / f);
    }

    OrderedJson manifest;
    manifest["config_digest"] = artifacts.config_digest;
    manifest["db_checksum"] = opt_json(artifacts.db_checksum);
    manifest["files"] = OrderedJson::object();
    for (const auto& [f, d] : artifacts.digests) manifest["files"][f] = d;
    manifest["volatile"] = OrderedJson::array();
    for (const auto& v : artifacts.variants) {
        manifest["volatile"].push_back(std::string(to_string(v.variant)) + "/timings.jsonl");
    }
    artifacts.manifest_path = config.output_dir / "manifest.json";
    write_file_atomic(artifacts.manifest_path, manifest.dump(2) + "\n");
    return artifacts;
}

std::vector<RefinedPrediction> read_predictions(const std::filesystem::path& path) {
    std::vector<RefinedPrediction> out;
    for_each_jsonl(path, [&](const Json& rec, std::size_t line) {
        try {
            RefinedPrediction p;
            p.query_id = rec.at("query_id").get<std::string>();
            p.label = opt_field(rec, "predicted");
            p.verdict = rec.contains("verdict") ? parse_verdict(rec.at("verdict").get<std::string>())
                                                : (p.label ? Verdict::kExact : Verdict::kUnparseable);
            if (rec.contains("rule_trace")) p.rule_trace = rec.at("rule_trace").get<std::vector<std::string>>();
            p.raw_text = rec.value("raw_text", "");
            out.push_back(std::move(p));
        } catch (const Json::exception& e) {
            throw ParseError(path.string() + ": bad prediction record: " + e.what(), static_cast<std::int64_t>(line));
        }
    });
    return out;
}

ScoredRun cmd_score(const ScoreRequest& request) {
    auto inventory = resolve_inventory(request.inventory);
    auto gold = load_corpus(request.gold, inventory, Split::kTest);
    if (!request.negative_label_semantics) {
        gold.inventory = gold.inventory.without_negative();
    }
    const auto predictions = read_predictions(request.predictions);
    auto run = score_run(predictions, gold, request.mode);
    run.run_id = request.run_id;
    if (request.out_dir) {
        for (auto fmt : {ReportFormat::kJson, ReportFormat::kCsv, ReportFormat::kMarkdown}) {
            emit_report(run, fmt, *request.out_dir / ("score" + std::string(extension(fmt))));
        }
    }
    return run;
}

ScoredRun load_scored_run(const std::filesystem::path& run_dir) {
    Json meta;
    try {
        meta = Json::parse(read_file(run_dir / "run.json"));
    } catch (const Json::parse_error& e) {
        throw ParseError((run_dir / "run.json").string() + ": malformed JSON", static_cast<std::int64_t>(e.byte));
    }
    try {
        const auto inventory = LabelInventory::from_json(meta.at("scoring_inventory"));
        const auto mode = parse_scoring_mode(meta.at("scoring_mode").get<std::string>());
        std::vector<InstanceOutcome> outcomes;
        for_each_jsonl(run_dir / "predictions.jsonl", [&](const Json& rec, std::size_t line) {
            auto gold = opt_field(rec, "gold");
            if (!gold) {
                throw ValidationError((run_dir / "predictions.jsonl").string() + ": line " + std::to_string(line) +
                                      " has no gold label");
            }
            InstanceOutcome o;
            o.query_id = rec.at("query_id").get<std::string>();
            o.gold_label = *gold;
            o.predicted = opt_field(rec, "predicted");
            o.verdict = parse_verdict(rec.value("verdict", o.predicted ? "exact" : "unparseable"));
            outcomes.push_back(std::move(o));
        });
        auto run = score_outcomes(std::move(outcomes), inventory, mode);
        run.run_id = meta.value("run_id", run_dir.filename().string());
        run.variant = parse_variant(meta.value("variant", "simple"));
        return run;
    } catch (const Json::exception& e) {
        throw ValidationError((run_dir / "run.json").string() + ": " + e.what());
    }
}

ComparisonReport cmd_compare(const std::filesystem::path& a_dir, const std::filesystem::path& b_dir,
                             const std::optional<std::filesystem::path>& out_dir) {
    auto report = compare_runs(load_scored_run(a_dir), load_scored_run(b_dir));
    if (out_dir) {
        for (auto fmt : {ReportFormat::kJson, ReportFormat::kCsv, ReportFormat::kMarkdown}) {
            emit_report(report, fmt, *out_dir / ("comparison" + std::string(extension(fmt))));
        }
    }
    return report;
}

}  // namespace rag4re
