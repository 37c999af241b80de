#pragma once

// Top-level command implementations behind the CLI: corpus generation, one
// evaluation run per dimension, and re-rendering reports from a stored run.

#include <string>
#include <vector>

#include "see/config.hpp"

namespace see {

inline constexpr const char* kDimensionNames[] = {"neighbors", "evasion", "leakage", "schedule",
                                                  "attention"};

struct CorpusOutcome {
    std::string corpus_path;
    std::string manifest_path;
    std::size_t records = 0;
};

struct RunOutcome {
    std::string run_dir;
    std::string run_id;
    std::size_t gap_count = 0;
};

// Writes corpus.jsonl + corpus_manifest.json into out_dir.
CorpusOutcome cmd_gen_corpus(const std::string& out_dir);

// Executes one evaluation dimension end-to-end and writes
// out_dir/<run-id>/{manifest.json, records.jsonl, summary.csv}
// (+ gaps.jsonl when generation gaps occurred). The caller maps
// gap_count > 0 to the partial-failure exit code.
RunOutcome cmd_run(const RunConfig& config, const std::string& dimension);

// Renders tables ("csv"/"md") or figures ("plots") from a stored run
// directory; returns the paths written. Byte-identical given the same run.
std::vector<std::string> cmd_report(const std::string& run_dir, const std::string& format);

// Accepts either a run directory path or a bare run id under runs_root.
std::string resolve_run_dir(const std::string& run_ref, const std::string& runs_root = "runs");

// Shared with cmd_run and cmd_report: recomputes the summary rows (per-bin
// groups plus the "overall" target/preserve rows) from raw records.
std::vector<MetricSummary> summary_rows_for(const std::vector<EvalRecord>& records);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace see
