#pragma once

#include <memory>
#include <string>
#include <vector>

#include "see/prompts.hpp"
#include "see/vocab.hpp"

namespace see {

// Minimum number of attribute additions, deletions, or substitutions turning
// one attribute map into the other. Defined only within one object family;
// symmetric; zero iff the maps are equal.
int attribute_edit_distance(const AttributeMap& a, const AttributeMap& b);

// PromptRecord front door: rejects cross-object pairs (use cosine similarity
// for those).
int attribute_edit_distance(const PromptRecord& a, const PromptRecord& b);

/// Text embedding provider, configured by a model identifier string.
class TextEmbedder {
public:
    virtual ~TextEmbedder() = default;
    virtual std::string id() const = 0;
    virtual std::vector<double> embed(const std::string& text) = 0;
};

// Deterministic bag-of-tokens embedder: each token maps to a fixed
// pseudo-random direction, phrases sum their tokens. Shared tokens pull
// phrases together, which is all the desk-scale tests need.
std::unique_ptr<TextEmbedder> make_hash_embedder(int dim = 64);

// Embedder factory for identifier strings ("hash-64", "hash-256", ...).
// Unknown identifiers raise ConfigError naming the known ones.
std::unique_ptr<TextEmbedder> make_embedder(const std::string& model_id);

// Cosine of the two embeddings after L2 normalization; symmetric, in [-1, 1].
// Backend failures are rethrown with both phrases attached.
double embedding_similarity(const std::string& concept_phrase, const std::string& target_phrase,
                            TextEmbedder& embedder);

enum class DistanceKind { edit_distance, cosine_similarity };

/// One half-open bin [lower, upper) of a stratified side-effect curve.
struct DistanceBin {
    DistanceKind kind = DistanceKind::edit_distance;
    double lower = 0;
    double upper = 0;
    std::vector<std::string> members;
    bool clamped = false;  // set when out-of-range values were folded in
};

// Assigns every (id, value) pair to exactly one bin. Edges must be strictly
// increasing; values outside [edges.front(), edges.back()) land in the
// nearest end bin with its clamped flag set.
std::vector<DistanceBin> bin_concepts(const std::vector<std::pair<std::string, double>>& pairs,
                                      const std::vector<double>& edges,
                                      DistanceKind kind = DistanceKind::edit_distance);

}  // namespace see
