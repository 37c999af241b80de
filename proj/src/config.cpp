#include "see/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "see/util.hpp"

namespace see {

namespace {

using nlohmann::json;

const std::vector<std::string>& known_keys() {
    static const std::vector<std::string> keys{
        "backend",        "base_model",    "cet",         "target",
        "seeds",          "verifiers",     "edit_bin_edges", "similarity_bin_width",
        "embedder_id",    "preserve_limit", "max_k",      "parallelism",
        "out_dir",        "mock",
    };
    return keys;
}

[[noreturn]] void reject_unknown_key(const std::string& key) {
    std::string best;
    std::size_t best_distance = SIZE_MAX;
    for (const std::string& candidate : known_keys()) {
        const std::size_t d = levenshtein(key, candidate);
        if (d < best_distance) {
            best_distance = d;
            best = candidate;
        }
    }
    std::string message = "unknown config key '" + key + "'";
    if (best_distance <= best.size() / 2 + 1) message += " (did you mean '" + best + "'?)";
    throw ConfigError(message);
}

template <typename T>
T take(const json& j, const std::string& key, const T& fallback) {
    if (j.count(key) == 0) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config key '" + key + "' has the wrong type");
    }
}

std::vector<VerifierSpec> parse_verifiers(const json& j) {
    if (j.count("verifiers") == 0) return RunConfig::default_verifiers();
    const json& list = j.at("verifiers");
    if (!list.is_array() || list.empty()) {
        throw ConfigError("config key 'verifiers' must be a non-empty array");
    }
    std::vector<VerifierSpec> specs;
    for (const json& entry : list) {
        VerifierSpec spec;
        if (entry.is_string()) {
            spec.id = entry.get<std::string>();
        } else if (entry.is_object()) {
            for (const auto& [key, value] : entry.items()) {
                (void)value;
                if (key != "id" && key != "mode") {
                    throw ConfigError("unknown verifier key '" + key +
                                      "' (expected 'id' and 'mode')");
                }
            }
            if (entry.count("id") == 0) throw ConfigError("verifier entry is missing 'id'");
            spec.id = entry.at("id").get<std::string>();
            if (entry.count("mode") > 0) {
                spec.mode = probe_mode_from_string(entry.at("mode").get<std::string>());
            }
        } else {
            throw ConfigError("verifier entries must be strings or {id, mode} objects");
        }
        if (spec.id.empty()) throw ConfigError("verifier id must be non-empty");
        specs.push_back(std::move(spec));
    }
    return specs;
}

}  // namespace

std::vector<VerifierSpec> RunConfig::default_verifiers() {
    return {VerifierSpec{"CLIP", ProbeMode::classify}, VerifierSpec{"QWEN2.5VL", ProbeMode::vqa},
            VerifierSpec{"BLIP", ProbeMode::vqa},
            VerifierSpec{"Florence-2-base", ProbeMode::vqa}};
}

std::size_t levenshtein(const std::string& a, const std::string& b) {
    std::vector<std::size_t> row(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diagonal = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t substitution = diagonal + (a[i - 1] == b[j - 1] ? 0 : 1);
            diagonal = row[j];
            row[j] = std::min({row[j] + 1, row[j - 1] + 1, substitution});
        }
    }
    return row[b.size()];
}

RunConfig parse_run_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& error) {
        throw ConfigError(std::string("config is not valid JSON: ") + error.what());
    }
    if (!j.is_object()) throw ConfigError("config root must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (std::find(known_keys().begin(), known_keys().end(), key) == known_keys().end()) {
            reject_unknown_key(key);
        }
    }

    RunConfig config;
    config.backend = take<std::string>(j, "backend", config.backend);
    if (config.backend != "mock" && config.backend != "http") {
        throw ConfigError("config key 'backend' must be \"mock\" or \"http\", got \"" +
                          config.backend + "\"");
    }
    config.base_model = take<std::string>(j, "base_model", config.base_model);
    if (config.base_model.empty()) throw ConfigError("config key 'base_model' must be non-empty");
    config.cet = take<std::string>(j, "cet", config.cet);
    if (config.cet.empty()) throw ConfigError("config key 'cet' must be non-empty");
    config.target = take<std::string>(j, "target", config.target);
    if (config.target.empty()) throw ConfigError("config key 'target' must be non-empty");
    config.seeds = take<std::vector<std::uint32_t>>(j, "seeds", config.seeds);
    if (config.seeds.empty()) throw ConfigError("config key 'seeds' must be non-empty");
    config.verifiers = parse_verifiers(j);
    config.edit_bin_edges = take<std::vector<double>>(j, "edit_bin_edges", config.edit_bin_edges);
    if (config.edit_bin_edges.size() < 2 ||
        !std::is_sorted(config.edit_bin_edges.begin(), config.edit_bin_edges.end()) ||
        std::adjacent_find(config.edit_bin_edges.begin(), config.edit_bin_edges.end()) !=
            config.edit_bin_edges.end()) {
        throw ConfigError("config key 'edit_bin_edges' must be >= 2 strictly increasing values");
    }
    config.similarity_bin_width =
        take<double>(j, "similarity_bin_width", config.similarity_bin_width);
    if (config.similarity_bin_width <= 0.0 || config.similarity_bin_width > 2.0) {
        throw ConfigError("config key 'similarity_bin_width' must be in (0, 2]");
    }
    config.embedder_id = take<std::string>(j, "embedder_id", config.embedder_id);
    config.preserve_limit = take<std::size_t>(j, "preserve_limit", config.preserve_limit);
    config.max_k = take<std::size_t>(j, "max_k", config.max_k);
    config.parallelism = take<int>(j, "parallelism", config.parallelism);
    if (config.parallelism < 1) throw ConfigError("config key 'parallelism' must be >= 1");
    config.out_dir = take<std::string>(j, "out_dir", config.out_dir);
    if (config.out_dir.empty()) throw ConfigError("config key 'out_dir' must be non-empty");
    if (j.count("mock") > 0) {
        if (!j.at("mock").is_object()) throw ConfigError("config key 'mock' must be an object");
        config.mock = mock_config_from_json(j.at("mock").dump());
    }
    return config;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    try {
        return parse_run_config(buffer.str());
    } catch (const ConfigError& error) {
        throw ConfigError(path + ": " + error.what());
    }
}

std::string normalized_config_json(const RunConfig& config) {
    json verifiers = json::array();
    for (const VerifierSpec& spec : config.verifiers) {
        verifiers.push_back({{"id", spec.id}, {"mode", to_string(spec.mode)}});
    }
    const json j{{"backend", config.backend},
                 {"base_model", config.base_model},
                 {"cet", config.cet},
                 {"target", config.target},
                 {"seeds", config.seeds},
                 {"verifiers", verifiers},
                 {"edit_bin_edges", config.edit_bin_edges},
                 {"similarity_bin_width", config.similarity_bin_width},
                 {"embedder_id", config.embedder_id},
                 {"preserve_limit", config.preserve_limit},
                 {"max_k", config.max_k},
                 {"parallelism", config.parallelism},
                 {"out_dir", config.out_dir},
                 {"mock", json::parse(mock_config_to_json(config.mock))}};
    return j.dump(2);
}

std::string run_id_for(const RunConfig& config, const std::string& dimension) {
    json j = json::parse(normalized_config_json(config));
    j.erase("out_dir");
    return "r-" + fnv1a64_hex(j.dump() + "\n" + dimension);
}

}  // namespace see
