#pragma once

// Deterministic in-process stand-in for the real text-to-image stack.  Images
// are structured JSON records listing the concepts the model "rendered", and
// erasure simply removes concept nodes from the generatable set — optionally
// with seeded collateral damage, attribute leakage, or a deliberately weak
// multi-target mode — so every metric code path can be exercised at desk
// scale and checked against brute-force recomputation.

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>

#include "see/catalog.hpp"
#include "see/gateway.hpp"
#include "see/prompts.hpp"

namespace see {

inline constexpr const char* kMockBaseModelId = "mock-base";

struct MockConfig {
    // Neighbors of an erased concept within this attribute edit distance are
    // also suppressed, each with probability `collateral_probability` drawn
    // reproducibly from `rng_seed` (order-independent across targets).
    int collateral_radius = 0;
    double collateral_probability = 0.0;
    std::uint64_t rng_seed = 17;

    // When the first object of a multi-object prompt is suppressed, move its
    // attributes onto the surviving objects (simulates attribute leakage).
    bool leak_attributes = false;

    // single_call edits with several targets suppress only the first one
    // (simulates the all-at-once scheduling weakness).
    bool weak_single_call = false;

    // Prompts containing this substring fail generation (gap-path testing).
    std::string fail_substring;

    int attention_height = 8;
    int attention_width = 8;

    // Throws ConfigError when radius < 0, probability outside [0,1], or
    // attention dimensions < 1.
    void validate() const;

    bool operator==(const MockConfig&) const = default;
};

MockConfig mock_config_from_json(const std::string& json_text);
std::string mock_config_to_json(const MockConfig& config);

/// Generator backend and CET adapter over one shared model table.  Register
/// the same instance with ModelGateway for both roles.
class MockStack final : public GeneratorBackend, public CetAdapter {
public:
    MockStack(std::shared_ptr<const ConceptTree> tree, MockConfig config,
              AttributeVocabulary vocab = AttributeVocabulary{});

    // GeneratorBackend
    std::string name() const override { return "mock"; }
    Capabilities capabilities() const override;
    ImageRecord generate(const std::string& backend_model_id,
                         const GenerateRequest& request) override;

    // CetAdapter
    std::string apply(const EditRequest& request) override;

    // Tree node ids the given model can no longer render.  Tests recompute
    // every reported accuracy from this set by brute force.
    std::set<std::string> suppression_set(const std::string& backend_model_id) const;

    const MockConfig& config() const { return config_; }

private:
    struct State {
        std::set<std::string> suppressed;
    };

    const State& state_of(const std::string& backend_model_id) const;
    const ConceptNode& resolve_phrase(const std::string& phrase) const;
    bool concept_present(const State& state, const std::string& node_id) const;

    std::shared_ptr<const ConceptTree> tree_;
    MockConfig config_;
    ConceptLexicon lexicon_;
    mutable std::mutex mutex_;
    std::map<std::string, State> states_;
};

// Payload helpers shared with the oracle verifier: mock payloads are
// "synthetic:" + compact JSON.
inline constexpr const char* kSyntheticPrefix = "synthetic:";

struct RenderedConcept {
    std::string object;      // object name, or the superclass name itself
    std::string superclass;
    AttributeMap attributes;

    bool operator==(const RenderedConcept&) const = default;
};

bool is_synthetic_payload(const std::string& payload);
std::vector<RenderedConcept> parse_synthetic_payload(const std::string& payload);

}  // namespace see
