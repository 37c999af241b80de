#include "see/distance.hpp"

#include <cmath>

#include "see/util.hpp"

namespace see {

int attribute_edit_distance(const AttributeMap& a, const AttributeMap& b) {
    // Each differing slot costs exactly one operation: an addition when a is
    // empty there, a deletion when b is, a substitution otherwise.
    int distance = 0;
    for (const char* slot : kSlotOrder) {
        auto ia = a.find(slot);
        auto ib = b.find(slot);
        const bool in_a = ia != a.end();
        const bool in_b = ib != b.end();
        if (in_a != in_b || (in_a && ia->second != ib->second)) ++distance;
    }
    return distance;
}

int attribute_edit_distance(const PromptRecord& a, const PromptRecord& b) {
    if (a.object_id != b.object_id) {
        throw ContractError("attribute edit distance is defined within one object family; '" +
                            a.object_id + "' vs '" + b.object_id +
                            "' -- use cosine similarity (embedding_similarity) for cross-object"
                            " pairs");
    }
    return attribute_edit_distance(a.attributes, b.attributes);
}

namespace {

class HashEmbedder final : public TextEmbedder {
public:
    explicit HashEmbedder(int dim) : dim_(dim) {
        if (dim_ < 2) throw ConfigError("hash embedder dimension must be >= 2");
    }

    std::string id() const override { return "hash-" + std::to_string(dim_); }

    std::vector<double> embed(const std::string& text) override {
        if (text.empty()) throw ContractError("cannot embed an empty phrase");
        std::vector<double> vec(static_cast<std::size_t>(dim_), 0.0);
        for (const auto& token : split_words(to_lower(text))) {
            std::uint64_t state = fnv1a64(token);
            for (auto& component : vec) {
                // Uniform in [-1, 1).
                component += static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-52 - 1.0;
            }
        }
        return vec;
    }

private:
    int dim_;
};

void l2_normalize(std::vector<double>& vec, const std::string& phrase) {
    double norm_sq = 0;
    for (double v : vec) norm_sq += v * v;
    if (norm_sq <= 0) throw BackendError("embedding of '" + phrase + "' has zero norm");
    const double inv = 1.0 / std::sqrt(norm_sq);
    for (double& v : vec) v *= inv;
}

}  // namespace

std::unique_ptr<TextEmbedder> make_hash_embedder(int dim) {
    return std::make_unique<HashEmbedder>(dim);
}

std::unique_ptr<TextEmbedder> make_embedder(const std::string& model_id) {
    if (model_id.rfind("hash-", 0) == 0) {
        try {
            return make_hash_embedder(std::stoi(model_id.substr(5)));
        } catch (const std::logic_error&) {
            throw ConfigError("bad hash embedder id: " + model_id);
        }
    }
    throw ConfigError("unknown embedder '" + model_id + "' (known: hash-<dim>)");
}

double embedding_similarity(const std::string& concept_phrase, const std::string& target_phrase,
                            TextEmbedder& embedder) {
    if (concept_phrase.empty() || target_phrase.empty()) {
        throw ContractError("similarity phrases must be non-empty");
    }
    std::vector<double> a, b;
    try {
        a = embedder.embed(concept_phrase);
        b = embedder.embed(target_phrase);
    } catch (const BackendError& e) {
        throw BackendError(std::string(e.what()) + " (while comparing '" + concept_phrase +
                           "' vs '" + target_phrase + "')");
    }
    if (a.size() != b.size() || a.empty()) {
        throw BackendError("embedder '" + embedder.id() + "' returned mismatched vectors for '" +
                           concept_phrase + "' vs '" + target_phrase + "'");
    }
    l2_normalize(a, concept_phrase);
    l2_normalize(b, target_phrase);
    double dot = 0;
    for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
    return dot;
}

std::vector<DistanceBin> bin_concepts(const std::vector<std::pair<std::string, double>>& pairs,
                                      const std::vector<double>& edges, DistanceKind kind) {
    if (edges.size() < 2) throw ContractError("binning needs at least two edges");
    for (std::size_t i = 1; i < edges.size(); ++i) {
        if (!(edges[i - 1] < edges[i])) throw ContractError("bin edges must be strictly increasing");
    }

    std::vector<DistanceBin> bins(edges.size() - 1);
    for (std::size_t i = 0; i < bins.size(); ++i) {
        bins[i].kind = kind;
        bins[i].lower = edges[i];
        bins[i].upper = edges[i + 1];
    }

    for (const auto& [id, value] : pairs) {
        std::size_t slot;
        bool clamped = false;
        if (value < edges.front()) {
            slot = 0;
            clamped = true;
        } else if (value >= edges.back()) {
            slot = bins.size() - 1;
            clamped = true;
        } else {
            slot = 0;
            while (value >= edges[slot + 1]) ++slot;
        }
        bins[slot].members.push_back(id);
        bins[slot].clamped |= clamped;
    }
    return bins;
}

}  // namespace see
