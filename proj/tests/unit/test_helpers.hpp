#pragma once

// Shared fixtures and tiny generators for the unit suite.

#include <fstream>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "see/catalog.hpp"
#include "see/coco.hpp"
#include "see/util.hpp"
#include "see/vocab.hpp"

namespace see::testing {

inline const ConceptTree& shared_tree() {
    static const ConceptTree tree = build_catalog(default_superclass_table(), AttributeVocabulary{});
    return tree;
}

inline std::shared_ptr<const ConceptTree> shared_tree_ptr() {
    static const auto tree = std::make_shared<const ConceptTree>(
        build_catalog(default_superclass_table(), AttributeVocabulary{}));
    return tree;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("test cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline std::string golden_path(const std::string& name) {
    return std::string(SEE_TEST_DATA_DIR) + "/golden/" + name;
}

inline std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("test cannot open " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

/// Deterministic generator for property tests; hand-rolled on std::mt19937_64
/// so failures replay from the printed seed.
class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    int uniform_int(int lo, int hi) {  // inclusive bounds
        return std::uniform_int_distribution<int>(lo, hi)(rng_);
    }
    double uniform_real(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(rng_);
    }
    template <typename T>
    const T& pick(const std::vector<T>& items) {
        return items[static_cast<std::size_t>(uniform_int(0, static_cast<int>(items.size()) - 1))];
    }
    std::mt19937_64& rng() { return rng_; }

private:
    std::mt19937_64 rng_;
};

}  // namespace see::testing
