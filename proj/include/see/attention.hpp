#pragma once

// Attention-spread probe.  Cross-attention grids arrive from the generator
// backend as raw non-negative mass; this module normalizes them into
// distributions, reduces multi-step / multi-token stacks, and scores how
// dispersed each concept's attention is.  "Spread" is normalized spatial
// entropy: 0 = all mass in one cell, 1 = uniform over the grid.  The measure
// is a documented reconstruction — reports must flag it as such.

#include <optional>
#include <string>
#include <vector>

#include "see/gateway.hpp"

namespace see {

/// One token's attention distribution: row-major, entries >= 0, sum == 1.
struct AttentionMap {
    std::string token;
    int height = 0;
    int width = 0;
    std::vector<double> data;

    bool operator==(const AttentionMap&) const = default;
};

// Validates shape and non-negativity, then scales the grid to unit mass.
// All-zero grids are degenerate input (ContractError): a backend that saw the
// token must have put mass somewhere.
AttentionMap normalize_grid(const std::string& token, const AttentionGrid& raw);

// Reduces per-timestep (or per-layer) grids for one token by elementwise
// mean BEFORE normalization, so heavier steps keep their weight.
AttentionGrid mean_pool(const std::vector<AttentionGrid>& steps);

// Reduces per-token maps for a multi-word phrase by elementwise mean AFTER
// normalization, so each token contributes equally. The result token is the
// space-joined phrase.
AttentionMap average_maps(const std::vector<AttentionMap>& maps);

// Normalized spatial entropy S = (-sum a_i ln a_i) / ln(H*W), with
// 0 ln 0 = 0.  A 1x1 grid cannot disperse and scores 0.
double spread(const AttentionMap& map);

// Spread of a concept phrase within one generated image: each word of the
// phrase is looked up in the record's attention, normalized, averaged, and
// scored.  Missing tokens raise LookupError naming the token and prompt.
double concept_spread(const ImageRecord& image, const std::string& phrase);

/// One model's coordinates on the accuracy-vs-spread scatter (Fig.-6 shape).
struct ScatterPoint {
    std::string model_id;
    double target_accuracy = 0.0;  // percent
    double mean_spread = 0.0;      // [0, 1]

    bool operator==(const ScatterPoint&) const = default;
};

/// Pearson correlation over scatter points; `r` is empty when either
/// coordinate has zero variance (correlation undefined, reported as such).
struct CorrelationResult {
    std::optional<double> r;
    std::size_t n = 0;
    std::vector<ScatterPoint> points;
};

// Requires >= 3 points (ContractError below that).
CorrelationResult correlate_spread_with_accuracy(const std::vector<ScatterPoint>& points);

}  // namespace see
