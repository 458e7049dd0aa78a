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

#include <csignal>
#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "rag4re/common/error.hpp"
#include "rag4re/pipeline/pipeline.hpp"
#include "rag4re/refine/refine.hpp"

namespace {

std::atomic<bool> g_stop{false};

extern "C" void on_sigint(int) { g_stop = true; }

void print_scores(const rag4re::ScoredRun& run) {
    std::cout << rag4re::render_report(run, rag4re::ReportFormat::kMarkdown);
}

}  // namespace

int main(int argc, char** argv) {
    using namespace rag4re;

    CLI::App app{"Retrieval-augmented relation extraction runner"};
    app.require_subcommand(1);
    bool quiet = false;
    app.add_flag("-q,--quiet", quiet, "Suppress progress output");

    std::string config_path;
    auto* index = app.add_subcommand("index", "Build the embedding DB from the training split");
    index->add_option("--config", config_path, "Run config (JSON)")->required()->check(CLI::ExistingFile);

    std::string variant;
    auto* run = app.add_subcommand("run", "Run the simple and/or rag variant over the test split");
    run->add_option("--config", config_path, "Run config (JSON)")->required()->check(CLI::ExistingFile);
    run->add_option("--variant", variant, "simple, rag or both (overrides the config)")
        ->check(CLI::IsMember({"simple", "rag", "both"}));

    ScoreRequest score_req;
    std::string mode = "positive-micro";
    std::string out_dir;
    bool no_negative = false;
    auto* score = app.add_subcommand("score", "Score a predictions file against a gold corpus");
    score->add_option("--pred", score_req.predictions, "Predictions (JSON lines)")->required()->check(CLI::ExistingFile);
    score->add_option("--gold", score_req.gold, "Gold corpus (TACRED json, SemEval txt or normalized jsonl)")
        ->required()
        ->check(CLI::ExistingFile);
    score->add_option("--mode", mode, "positive-micro or all-labels")
        ->check(CLI::IsMember({"positive-micro", "all-labels"}));
    score->add_option("--inventory", score_req.inventory, "Inventory kind or file")->capture_default_str();
    score->add_flag("--no-negative-label", no_negative, "Count every label as positive");
    score->add_option("--out", out_dir, "Write score.{json,csv,md} here");

    std::string a_dir;
    std::string b_dir;
    auto* compare = app.add_subcommand("compare", "Compare two run directories (b minus a)");
    compare->add_option("--a", a_dir, "Baseline run directory")->required()->check(CLI::ExistingDirectory);
    compare->add_option("--b", b_dir, "Candidate run directory")->required()->check(CLI::ExistingDirectory);
    compare->add_option("--out", out_dir, "Write comparison.{json,csv,md} here");

    std::string inventory_name;
    auto* audit = app.add_subcommand("refine-audit", "Print the label restoration table for an inventory");
    audit->add_option("--inventory", inventory_name, "Inventory kind or file")->required();

    std::string norm_in;
    std::string norm_out;
    auto* normalize = app.add_subcommand("normalize", "Convert a corpus to normalized JSON lines");
    normalize->add_option("--in", norm_in, "Input corpus")->required()->check(CLI::ExistingFile);
    normalize->add_option("--out", norm_out, "Output .jsonl")->required();
    normalize->add_option("--inventory", inventory_name, "Inventory kind or file")->required();

    CLI11_PARSE(app, argc, argv);

    std::signal(SIGINT, on_sigint);
    PipelineHooks hooks;
    hooks.stop = &g_stop;
    if (!quiet) hooks.log = [](const std::string& msg) { std::cerr << msg << "\n"; };

    try {
        if (*index) {
            const auto r = cmd_index(RunConfig::load(config_path), hooks);
            std::cout << r.db_path.string() << " " << r.entries << " entries " << r.checksum << "\n";
        } else if (*run) {
            std::optional<VariantSelection> sel;
            if (!variant.empty()) sel = parse_variant_selection(variant);
            const auto art = cmd_run(RunConfig::load(config_path), sel, hooks);
            std::vector<ScoredRun> runs;
            for (const auto& v : art.variants) runs.push_back(v.score);
            std::cout << render_metrics_table(runs) << "\n" << render_error_table(runs);
            std::cout << "manifest: " << art.manifest_path.string() << "\n";
        } else if (*score) {
            score_req.mode = parse_scoring_mode(mode);
            score_req.negative_label_semantics = !no_negative;
            score_req.run_id = score_req.predictions.stem().string();
            if (!out_dir.empty()) score_req.out_dir = out_dir;
            print_scores(cmd_score(score_req));
        } else if (*compare) {
            std::optional<std::filesystem::path> out;
            if (!out_dir.empty()) out = out_dir;
            std::cout << render_report(cmd_compare(a_dir, b_dir, out), ReportFormat::kMarkdown);
        } else if (*audit) {
            std::cout << refinement_table(resolve_inventory(inventory_name)).to_json().dump(2) << "\n";
        } else if (*normalize) {
            const auto corpus = load_corpus(norm_in, resolve_inventory(inventory_name), Split::kTest);
            save_normalized(corpus, norm_out);
            std::cout << corpus.instances.size() << " instances\n";
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(e.exit_code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(ExitCode::kValidation);
    }
    return 0;
}
