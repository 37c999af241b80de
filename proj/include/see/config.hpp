#pragma once

// Run configuration: one JSON file fully determines a run.  Parsing applies
// defaults, rejects unknown keys (with a nearest-key suggestion), and
// normalizes the result so the manifest can echo exactly what executed.

#include <cstdint>
#include <string>
#include <vector>

#include "see/eval.hpp"
#include "see/mock.hpp"

namespace see {

struct RunConfig {
    std::string backend = "mock";          // "mock" or "http"
    std::string base_model = "mock-base";  // backend-side id of the unedited model
    std::string cet = "mock-cet";          // adapter-side technique name
    std::string target = "cup";            // erase target (superclass for evasion runs)
    std::vector<std::uint32_t> seeds = {0, 1, 2, 3};
    std::vector<VerifierSpec> verifiers = default_verifiers();
    std::vector<double> edit_bin_edges = {0, 1, 2, 3, 4};
    double similarity_bin_width = 0.05;
    std::string embedder_id = "hash-64";
    std::size_t preserve_limit = 0;  // 0 = full preserve set
    std::size_t max_k = 0;           // schedule curve cap, 0 = |erase_set|
    int parallelism = 1;
    std::string out_dir = "runs";
    MockConfig mock;

    // The four verifier columns of the reference tables: CLIP classifies,
    // the three VQA models answer yes/no questions.
    static std::vector<VerifierSpec> default_verifiers();

    bool operator==(const RunConfig&) const = default;
};

// Parses and validates config JSON text. Missing keys take defaults; unknown
// keys raise ConfigError naming the key and suggesting the nearest known one;
// type mismatches raise ConfigError naming the key.
RunConfig parse_run_config(const std::string& json_text);

// Reads the file and delegates to parse_run_config; errors carry the path.
RunConfig load_run_config(const std::string& path);

// Fully-expanded JSON (every field explicit, keys sorted) — what the manifest
// stores and what the run id is derived from.
std::string normalized_config_json(const RunConfig& config);

// Stable run id: digest over the normalized config minus out_dir (a run is
// the same experiment wherever it is written) plus the dimension name.
std::string run_id_for(const RunConfig& config, const std::string& dimension);

// Levenshtein edit distance between two strings (key-suggestion helper).
std::size_t levenshtein(const std::string& a, const std::string& b);

}  // namespace see
