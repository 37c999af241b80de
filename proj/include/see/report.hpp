#pragma once

// Result persistence and rendering: the run manifest, the flat summary CSV,
// the paper-shaped accuracy tables (CSV and Markdown), and the figure data
// feeding the SVG plots.  Everything here is a pure function of its inputs so
// re-rendering a stored run is byte-identical.

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "see/eval.hpp"
#include "see/gateway.hpp"

namespace see {

// Sidecar metadata for one evaluation run.  The manifest is the only run
// artifact allowed to carry a timestamp; records and summaries must be
// byte-stable across reruns.
struct RunManifest {
    std::string run_id;
    std::string dimension;
    std::string created_at;  // ISO-8601 UTC
    std::string tree_digest;
    std::string corpus_digest;
    std::string generator_version;
    std::string config_json;    // normalized run config (JSON text)
    std::string analysis_json;  // dimension-specific extras (JSON text, "{}" if none)
    std::vector<GeneratorHandle> models;           // registration order
    std::map<std::string, std::string> model_labels;  // model_id -> human label
    std::vector<std::pair<std::string, std::string>> verifier_versions;  // (id, version)
    std::map<std::string, std::vector<std::string>> leakage_pairing;  // target -> partners
    std::vector<std::string> notes;  // measurement conventions worth flagging
    std::size_t gap_count = 0;
};

std::string manifest_to_json(const RunManifest& manifest);
RunManifest manifest_from_json(const std::string& text);

// Flat per-bin/per-group summary. Rows are re-sorted by (model, verifier,
// dimension, group); mean/std carry four decimals.
std::string render_summary_csv(std::vector<MetricSummary> rows);

// Plain cell grid rendered to CSV or Markdown.
struct TextTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

std::string table_to_csv(const TextTable& table);
std::string table_to_md(const TextTable& table);
std::string csv_escape(const std::string& field);

// One row per (model, metric); one "mean ± std" column per verifier, in the
// given order. Consumes the group=="overall" summary rows for the run's
// dimension. `model_order` fixes row order (registration order from the
// manifest); models without any overall row are skipped.
TextTable build_accuracy_table(const std::vector<MetricSummary>& summaries,
                               const std::string& dimension,
                               const std::vector<std::string>& model_order,
                               const std::map<std::string, std::string>& model_labels,
                               const std::vector<std::string>& verifier_order);

// Leakage per-attribute-family breakdown: one row per (model, metric, family).
TextTable build_family_breakdown_table(const std::vector<MetricSummary>& summaries,
                                       const std::vector<std::string>& model_order,
                                       const std::map<std::string, std::string>& model_labels,
                                       const std::vector<std::string>& verifier_order);

// Per-k schedule comparison: one row per k, columns progressive /
// all-at-once, values from the stored analysis curves.
TextTable build_schedule_table(const std::vector<int>& ks, const std::vector<double>& progressive,
                               const std::vector<double>& all_at_once);

// --- plot builders ----------------------------------------------------------

// Accuracy-vs-bin curves for one neighbor side (erase or preserve) and one
// bin kind ("edit" or "cos"), one series per (model, verifier).  Bin labels
// are parsed back to their lower edges for the x axis.
std::string render_neighbor_plot(const std::vector<MetricSummary>& summaries, Dimension side,
                                 const std::string& bin_kind,
                                 const std::vector<std::string>& model_order,
                                 const std::map<std::string, std::string>& model_labels,
                                 const std::vector<std::string>& verifier_order);

// Progressive vs all-at-once accuracy over k.
std::string render_schedule_plot(const std::vector<int>& ks, const std::vector<double>& progressive,
                                 const std::vector<double>& all_at_once);

// Attention-spread vs target-accuracy scatter.
std::string render_scatter_plot(const std::vector<ScatterPoint>& points,
                                const std::map<std::string, std::string>& model_labels,
                                const std::optional<double>& r);

// Lower edge encoded in a bin label ("edit[1,2)" -> 1, "cos[0.85,0.90)" ->
// 0.85); nullopt for non-bin groups like "overall".
std::optional<double> bin_lower_edge(const std::string& group);

}  // namespace see
