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

#include "rag4re/evalkit/evalkit.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>
#include <unordered_map>

#include "rag4re/common/error.hpp"

namespace rag4re {

std::string_view to_string(ScoringMode m) noexcept {
    return m == ScoringMode::kAllLabels ? "all-labels" : "positive-micro";
}

ScoringMode parse_scoring_mode(std::string_view name) {
    if (name == "positive-micro") return ScoringMode::kPositiveMicro;
    if (name == "all-labels") return ScoringMode::kAllLabels;
    throw ValidationError("unknown scoring mode: " + std::string(name) + " (expected positive-micro or all-labels)");
}

MicroScores micro_from_counts(std::size_t tp, std::size_t fp, std::size_t fn) noexcept {
    MicroScores s;
    const auto t = static_cast<double>(tp);
    if (tp + fp > 0) s.precision = t / static_cast<double>(tp + fp);
    if (tp + fn > 0) s.recall = t / static_cast<double>(tp + fn);
    if (s.precision + s.recall > 0) s.f1 = 2.0 * s.precision * s.recall / (s.precision + s.recall);
    return s;
}

ScoredRun score_outcomes(std::vector<InstanceOutcome> outcomes, const LabelInventory& inventory, ScoringMode mode) {
    if (outcomes.empty()) {
        throw ValidationError("score: no instances to score");
    }
    std::sort(outcomes.begin(), outcomes.end(), [](const auto& a, const auto& b) { return a.query_id < b.query_id; });
    ScoredRun run;
    run.dataset_kind = inventory.kind();
    run.mode = mode;
    run.negative_label = inventory.negative_label();
    const bool all_labels = mode == ScoringMode::kAllLabels;
    for (const auto& label : inventory.labels()) {
        if (all_labels || !inventory.is_negative(label)) {
            run.per_label.emplace(label, LabelCounts{});
        }
    }
    for (const auto& o : outcomes) {
        if (o.predicted && !inventory.contains(*o.predicted)) {
            throw ValidationError("score: prediction '" + *o.predicted + "' for '" + o.query_id +
                                  "' is not an inventory label");
        }
        if (!o.predicted) ++run.unparseable_count;
        const bool correct = o.predicted && *o.predicted == o.gold_label;
        if (all_labels) {
            if (correct) {
                ++run.tp_count;
                ++run.per_label[o.gold_label].tp;
            } else {
                ++run.fp_count;
                ++run.fn_count;
                if (o.predicted) ++run.per_label[*o.predicted].fp;
                ++run.per_label[o.gold_label].fn;
            }
            continue;
        }
        const bool gold_positive = !inventory.is_negative(o.gold_label);
        const bool pred_positive = o.predicted && !inventory.is_negative(*o.predicted);
        if (correct && gold_positive) {
            ++run.tp_count;
            ++run.per_label[o.gold_label].tp;
        }
        if (!correct && pred_positive) {
            ++run.fp_count;
            ++run.per_label[*o.predicted].fp;
        }
        if (!correct && gold_positive) {
            ++run.fn_count;
            ++run.per_label[o.gold_label].fn;
        }
    }
    run.micro = micro_from_counts(run.tp_count, run.fp_count, run.fn_count);
    run.per_instance = std::move(outcomes);
    return run;
}

ScoredRun score_run(std::span<const RefinedPrediction> predictions, const Corpus& gold, ScoringMode mode) {
    std::unordered_map<std::string_view, const RefinedPrediction*> by_id;
    std::vector<std::string> extra;
    for (const auto& p : predictions) {
        if (!by_id.emplace(p.query_id, &p).second) {
            throw ValidationError("score: duplicate prediction for '" + p.query_id + "'");
        }
    }
    std::vector<std::string> missing;
    std::vector<InstanceOutcome> outcomes;
    outcomes.reserve(gold.instances.size());
    for (const auto& inst : gold.instances) {
        auto it = by_id.find(inst.id);
        if (it == by_id.end()) {
            missing.push_back(inst.id);
            continue;
        }
        if (!inst.gold_label) {
            throw ValidationError("score: gold instance '" + inst.id + "' has no gold label");
        }
        outcomes.push_back(InstanceOutcome{inst.id, *inst.gold_label, it->second->label, it->second->verdict});
        by_id.erase(it);
    }
    for (const auto& [id, _] : by_id) extra.emplace_back(id);
    if (!missing.empty() || !extra.empty()) {
        std::sort(extra.begin(), extra.end());
        auto list = [](const std::vector<std::string>& v) {
            std::string s;
            for (std::size_t i = 0; i < v.size() && i < 10; ++i) s += (i ? ", " : "") + v[i];
            if (v.size() > 10) s += ", ... (" + std::to_string(v.size()) + " total)";
            return s;
        };
        std::string msg = "score: predictions do not match gold ids;";
        if (!missing.empty()) msg += " missing: [" + list(missing) + "]";
        if (!extra.empty()) msg += " extra: [" + list(extra) + "]";
        throw ValidationError(msg);
    }
    return score_outcomes(std::move(outcomes), gold.inventory, mode);
}

ScoredRun score_mode_all_labels(std::span<const RefinedPrediction> predictions, const Corpus& gold) {
    return score_run(predictions, gold, ScoringMode::kAllLabels);
}

ComparisonReport compare_runs(const ScoredRun& a, const ScoredRun& b) {
    if (a.dataset_kind != b.dataset_kind) {
        throw ValidationError("compare: runs are over different datasets (" + std::string(to_string(a.dataset_kind)) +
                              " vs " + std::string(to_string(b.dataset_kind)) + ")");
    }
    if (a.mode != b.mode) {
        throw ValidationError("compare: runs were scored in different modes");
    }
    if (a.per_instance.size() != b.per_instance.size()) {
        throw ValidationError("compare: runs cover different instance sets (" + std::to_string(a.per_instance.size()) +
                              " vs " + std::to_string(b.per_instance.size()) + " instances)");
    }
    ComparisonReport r;
    r.a_run_id = a.run_id;
    r.b_run_id = b.run_id;
    r.dataset_kind = a.dataset_kind;
    r.mode = a.mode;
    r.a = a.micro;
    r.b = b.micro;
    r.delta = {b.micro.precision - a.micro.precision, b.micro.recall - a.micro.recall, b.micro.f1 - a.micro.f1};
    r.fp = {a.fp_count, b.fp_count};
    r.fn = {a.fn_count, b.fn_count};
    r.unparseable = {a.unparseable_count, b.unparseable_count};
    for (std::size_t i = 0; i < a.per_instance.size(); ++i) {
        const auto& x = a.per_instance[i];
        const auto& y = b.per_instance[i];
        if (x.query_id != y.query_id) {
            throw ValidationError("compare: runs cover different instance sets (first difference: '" + x.query_id +
                                  "' vs '" + y.query_id + "')");
        }
        if (x.gold_label != y.gold_label) {
            throw ValidationError("compare: gold label differs for '" + x.query_id + "'");
        }
        if (x.predicted != y.predicted) {
            r.disagreements.push_back(Disagreement{x.query_id, x.gold_label, x.predicted, y.predicted});
        }
    }
    std::set<std::string> labels;
    for (const auto& [l, _] : a.per_label) labels.insert(l);
    for (const auto& [l, _] : b.per_label) labels.insert(l);
    for (const auto& l : labels) {
        auto get = [&](const ScoredRun& run) {
            auto it = run.per_label.find(l);
            return it == run.per_label.end() ? LabelCounts{} : it->second;
        };
        const auto ca = get(a);
        const auto cb = get(b);
        auto d = [](std::size_t x, std::size_t y) { return static_cast<long long>(y) - static_cast<long long>(x); };
        r.per_label_delta[l] = {d(ca.tp, cb.tp), d(ca.fp, cb.fp), d(ca.fn, cb.fn)};
    }
    return r;
}

// ---------------------------------------------------------------------------
// Reports

ReportFormat parse_report_format(std::string_view name) {
    if (name == "json") return ReportFormat::kJson;
    if (name == "csv") return ReportFormat::kCsv;
    if (name == "markdown" || name == "md") return ReportFormat::kMarkdown;
    throw ValidationError("unknown report format: " + std::string(name) + " (expected json, csv or markdown)");
}

std::string_view extension(ReportFormat f) noexcept {
    switch (f) {
        case ReportFormat::kJson: return ".json";
        case ReportFormat::kCsv: return ".csv";
        case ReportFormat::kMarkdown: return ".md";
    }
    return ".json";
}

std::string format_percent(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", 100.0 * fraction);
    return buf;
}

namespace {

std::string format_real(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

OrderedJson micro_json(const MicroScores& m) {
    OrderedJson j;
    j["precision"] = m.precision;
    j["recall"] = m.recall;
    j["f1"] = m.f1;
    return j;
}

OrderedJson opt_json(const std::optional<std::string>& v) { return v ? OrderedJson(*v) : OrderedJson(nullptr); }

std::string run_label(const ScoredRun& run) {
    return run.run_id.empty() ? std::string(to_string(run.variant)) : run.run_id;
}

}  // namespace

OrderedJson run_to_json(const ScoredRun& run) {
    OrderedJson j;
    j["run_id"] = run.run_id;
    j["variant"] = std::string(to_string(run.variant));
    j["dataset_kind"] = std::string(to_string(run.dataset_kind));
    j["scoring_mode"] = std::string(to_string(run.mode));
    j["negative_label"] = opt_json(run.negative_label);
    j["instances"] = run.per_instance.size();
    j["micro"] = micro_json(run.micro);
    j["tp_count"] = run.tp_count;
    j["fp_count"] = run.fp_count;
    j["fn_count"] = run.fn_count;
    j["unparseable_count"] = run.unparseable_count;
    OrderedJson per_label = OrderedJson::object();
    for (const auto& [label, c] : run.per_label) {
        per_label[label] = OrderedJson{{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}};
    }
    j["per_label"] = std::move(per_label);
    return j;
}

std::string render_metrics_table(std::span<const ScoredRun> runs) {
    std::ostringstream out;
    out << "| Run | Dataset | P(%) | R(%) | F1(%) |\n";
    out << "|---|---|---:|---:|---:|\n";
    for (const auto& r : runs) {
        out << "| " << run_label(r) << " | " << to_string(r.dataset_kind) << " | " << format_percent(r.micro.precision)
            << " | " << format_percent(r.micro.recall) << " | " << format_percent(r.micro.f1) << " |\n";
    }
    return out.str();
}

std::string render_error_table(std::span<const ScoredRun> runs) {
    std::ostringstream out;
    out << "| Run | Dataset | FP | FN | Unparseable |\n";
    out << "|---|---|---:|---:|---:|\n";
    for (const auto& r : runs) {
        out << "| " << run_label(r) << " | " << to_string(r.dataset_kind) << " | " << r.fp_count << " | " << r.fn_count
            << " | " << r.unparseable_count << " |\n";
    }
    return out.str();
}

std::string render_report(const ScoredRun& run, ReportFormat format) {
    switch (format) {
        case ReportFormat::kJson: return run_to_json(run).dump(2) + "\n";
        case ReportFormat::kCsv: {
            std::ostringstream out;
            out << "metric,value\n";
            out << "precision," << format_real(run.micro.precision) << "\n";
            out << "recall," << format_real(run.micro.recall) << "\n";
            out << "f1," << format_real(run.micro.f1) << "\n";
            out << "tp_count," << run.tp_count << "\n";
            out << "fp_count," << run.fp_count << "\n";
            out << "fn_count," << run.fn_count << "\n";
            out << "unparseable_count," << run.unparseable_count << "\n";
            return out.str();
        }
        case ReportFormat::kMarkdown: {
            std::ostringstream out;
            const std::span<const ScoredRun> one(&run, 1);
            out << "# " << run_label(run) << " (" << to_string(run.mode) << ")\n\n";
            out << render_metrics_table(one) << "\n" << render_error_table(one) << "\n";
            out << "| Label | TP | FP | FN |\n|---|---:|---:|---:|\n";
            for (const auto& [label, c] : run.per_label) {
                out << "| " << label << " | " << c.tp << " | " << c.fp << " | " << c.fn << " |\n";
            }
            return out.str();
        }
    }
    return {};
}

std::string render_report(const ComparisonReport& cmp, ReportFormat format) {
    switch (format) {
        case ReportFormat::kJson: {
            OrderedJson j;
            j["a"] = cmp.a_run_id;
            j["b"] = cmp.b_run_id;
            j["dataset_kind"] = std::string(to_string(cmp.dataset_kind));
            j["scoring_mode"] = std::string(to_string(cmp.mode));
            j["micro"] = OrderedJson{{"a", micro_json(cmp.a)}, {"b", micro_json(cmp.b)}, {"delta", micro_json(cmp.delta)}};
            auto counts = [](const std::array<std::size_t, 2>& v) {
                return OrderedJson{{"a", v[0]}, {"b", v[1]},
                                   {"delta", static_cast<long long>(v[1]) - static_cast<long long>(v[0])}};
            };
            j["fp_count"] = counts(cmp.fp);
            j["fn_count"] = counts(cmp.fn);
            j["unparseable_count"] = counts(cmp.unparseable);
            OrderedJson per_label = OrderedJson::object();
            for (const auto& [label, d] : cmp.per_label_delta) {
                per_label[label] = OrderedJson{{"tp", d[0]}, {"fp", d[1]}, {"fn", d[2]}};
            }
            j["per_label_delta"] = std::move(per_label);
            j["disagreements"] = OrderedJson::array();
            for (const auto& d : cmp.disagreements) {
                j["disagreements"].push_back(OrderedJson{{"query_id", d.query_id},
                                                         {"gold", d.gold_label},
                                                         {"a", opt_json(d.a_predicted)},
                                                         {"b", opt_json(d.b_predicted)}});
            }
            return j.dump(2) + "\n";
        }
        case ReportFormat::kCsv: {
            std::ostringstream out;
            out << "metric,a,b,delta\n";
            auto real_row = [&](const char* name, double a, double b, double d) {
                out << name << "," << format_real(a) << "," << format_real(b) << "," << format_real(d) << "\n";
            };
            auto count_row = [&](const char* name, const std::array<std::size_t, 2>& v) {
                out << name << "," << v[0] << "," << v[1] << ","
                    << static_cast<long long>(v[1]) - static_cast<long long>(v[0]) << "\n";
            };
            real_row("precision", cmp.a.precision, cmp.b.precision, cmp.delta.precision);
            real_row("recall", cmp.a.recall, cmp.b.recall, cmp.delta.recall);
            real_row("f1", cmp.a.f1, cmp.b.f1, cmp.delta.f1);
            count_row("fp_count", cmp.fp);
            count_row("fn_count", cmp.fn);
            count_row("unparseable_count", cmp.unparseable);
            return out.str();
        }
        case ReportFormat::kMarkdown: {
            std::ostringstream out;
            out << "# " << cmp.a_run_id << " vs " << cmp.b_run_id << " (" << to_string(cmp.dataset_kind) << ", "
                << to_string(cmp.mode) << ")\n\n";
            out << "| Run | P(%) | R(%) | F1(%) |\n|---|---:|---:|---:|\n";
            out << "| " << cmp.a_run_id << " | " << format_percent(cmp.a.precision) << " | "
                << format_percent(cmp.a.recall) << " | " << format_percent(cmp.a.f1) << " |\n";
            out << "| " << cmp.b_run_id << " | " << format_percent(cmp.b.precision) << " | "
                << format_percent(cmp.b.recall) << " | " << format_percent(cmp.b.f1) << " |\n";
            out << "| delta | " << format_percent(cmp.delta.precision) << " | " << format_percent(cmp.delta.recall)
                << " | " << format_percent(cmp.delta.f1) << " |\n\n";
            out << "| Run | FP | FN | Unparseable |\n|---|---:|---:|---:|\n";
            out << "| " << cmp.a_run_id << " | " << cmp.fp[0] << " | " << cmp.fn[0] << " | " << cmp.unparseable[0]
                << " |\n";
            out << "| " << cmp.b_run_id << " | " << cmp.fp[1] << " | " << cmp.fn[1] << " | " << cmp.unparseable[1]
                << " |\n\n";
            out << "Instances where the runs disagree: " << cmp.disagreements.size() << "\n";
            return out.str();
        }
    }
    return {};
}

void emit_report(const ScoredRun& run, ReportFormat format, const std::filesystem::path& path) {
    write_file_atomic(path, render_report(run, format));
}

void emit_report(const ComparisonReport& cmp, ReportFormat format, const std::filesystem::path& path) {
    write_file_atomic(path, render_report(cmp, format));
}

}  // namespace rag4re
