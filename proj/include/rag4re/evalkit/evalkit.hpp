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

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rag4re/corpus/corpus.hpp"
#include "rag4re/promptgen/prompt.hpp"
#include "rag4re/refine/refine.hpp"

namespace rag4re {

enum class ScoringMode { kPositiveMicro, kAllLabels };

std::string_view to_string(ScoringMode m) noexcept;
ScoringMode parse_scoring_mode(std::string_view name);

struct LabelCounts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    friend bool operator==(const LabelCounts&, const LabelCounts&) = default;
};

struct InstanceOutcome {
    std::string query_id;
    std::string gold_label;
    std::optional<std::string> predicted;
    Verdict verdict = Verdict::kUnparseable;
    friend bool operator==(const InstanceOutcome&, const InstanceOutcome&) = default;
};

struct MicroScores {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    friend bool operator==(const MicroScores&, const MicroScores&) = default;
};

// Harmonic-mean scores from corpus-wide sums; any zero denominator yields 0.
MicroScores micro_from_counts(std::size_t tp, std::size_t fp, std::size_t fn) noexcept;

struct ScoredRun {
    std::string run_id;
    PromptVariant variant = PromptVariant::kSimple;
    DatasetKind dataset_kind = DatasetKind::kCustom;
    ScoringMode mode = ScoringMode::kPositiveMicro;
    std::optional<std::string> negative_label;
    std::vector<InstanceOutcome> per_instance;  // sorted by query_id
    MicroScores micro;
    std::size_t tp_count = 0;
    std::size_t fp_count = 0;
    std::size_t fn_count = 0;
    std::size_t unparseable_count = 0;
    std::map<std::string, LabelCounts> per_label;
};

// positive-micro: tp when predicted == gold and gold is positive; fp when the prediction is a
// positive label other than gold; fn when gold is positive and predicted != gold. One instance
// can be both fp and fn. The negative label never earns a tp.
//
// all-labels: every label (negative included) is scored, and a missing prediction counts as a
// wrong one, so P = R = F1 = accuracy.
ScoredRun score_outcomes(std::vector<InstanceOutcome> outcomes, const LabelInventory& inventory, ScoringMode mode);

// Predictions must cover exactly the gold ids.
ScoredRun score_run(std::span<const RefinedPrediction> predictions, const Corpus& gold,
                    ScoringMode mode = ScoringMode::kPositiveMicro);
ScoredRun score_mode_all_labels(std::span<const RefinedPrediction> predictions, const Corpus& gold);

struct Disagreement {
    std::string query_id;
    std::string gold_label;
    std::optional<std::string> a_predicted;
    std::optional<std::string> b_predicted;
};

struct ComparisonReport {
    std::string a_run_id;
    std::string b_run_id;
    DatasetKind dataset_kind = DatasetKind::kCustom;
    ScoringMode mode = ScoringMode::kPositiveMicro;
    MicroScores a;
    MicroScores b;
    MicroScores delta;  // b - a
    std::array<std::size_t, 2> fp{};
    std::array<std::size_t, 2> fn{};
    std::array<std::size_t, 2> unparseable{};
    std::map<std::string, std::array<long long, 3>> per_label_delta;  // label -> (dtp, dfp, dfn)
    std::vector<Disagreement> disagreements;
};

ComparisonReport compare_runs(const ScoredRun& a, const ScoredRun& b);

enum class ReportFormat { kJson, kCsv, kMarkdown };

ReportFormat parse_report_format(std::string_view name);
std::string_view extension(ReportFormat f) noexcept;

// Percent with one decimal, e.g. 0.8661 -> "86.6".
std::string format_percent(double fraction);

std::string render_report(const ScoredRun& run, ReportFormat format);
std::string render_report(const ComparisonReport& cmp, ReportFormat format);
// Precision/recall/F1 table, one row per run, columns in P, R, F1 order.
std::string render_metrics_table(std::span<const ScoredRun> runs);
// FP/FN table, one row per run.
std::string render_error_table(std::span<const ScoredRun> runs);

void emit_report(const ScoredRun& run, ReportFormat format, const std::filesystem::path& path);
void emit_report(const ComparisonReport& cmp, ReportFormat format, const std::filesystem::path& path);

OrderedJson run_to_json(const ScoredRun& run);

}  // namespace rag4re
