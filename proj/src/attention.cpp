#include "see/attention.hpp"

#include <cmath>
#include <sstream>

#include "see/prompts.hpp"
#include "see/util.hpp"

namespace see {

namespace {

void check_shape(const std::string& what, int height, int width, std::size_t size) {
    if (height < 1 || width < 1) {
        throw ContractError(what + ": grid must be at least 1x1, got " +
                            std::to_string(height) + "x" + std::to_string(width));
    }
    const auto expected = static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
    if (size != expected) {
        throw ContractError(what + ": expected " + std::to_string(expected) +
                            " cells for " + std::to_string(height) + "x" +
                            std::to_string(width) + ", got " + std::to_string(size));
    }
}

}  // namespace

AttentionMap normalize_grid(const std::string& token, const AttentionGrid& raw) {
    check_shape("normalize_grid('" + token + "')", raw.height, raw.width, raw.data.size());
    double sum = 0.0;
    for (double cell : raw.data) {
        if (cell < 0.0) {
            throw ContractError("normalize_grid('" + token +
                                "'): negative attention mass " + fmt_fixed(cell, 6));
        }
        sum += cell;
    }
    if (sum <= 0.0) {
        throw ContractError("normalize_grid('" + token + "'): all-zero grid is degenerate");
    }
    AttentionMap map;
    map.token = token;
    map.height = raw.height;
    map.width = raw.width;
    map.data.reserve(raw.data.size());
    for (double cell : raw.data) map.data.push_back(cell / sum);
    return map;
}

AttentionGrid mean_pool(const std::vector<AttentionGrid>& steps) {
    if (steps.empty()) throw ContractError("mean_pool: no grids to pool");
    const AttentionGrid& first = steps.front();
    check_shape("mean_pool", first.height, first.width, first.data.size());
    AttentionGrid pooled;
    pooled.height = first.height;
    pooled.width = first.width;
    pooled.data.assign(first.data.size(), 0.0);
    for (const AttentionGrid& step : steps) {
        if (step.height != first.height || step.width != first.width ||
            step.data.size() != first.data.size()) {
            throw ContractError("mean_pool: mixed grid shapes (" +
                                std::to_string(first.height) + "x" + std::to_string(first.width) +
                                " vs " + std::to_string(step.height) + "x" +
                                std::to_string(step.width) + ")");
        }
        for (std::size_t i = 0; i < step.data.size(); ++i) pooled.data[i] += step.data[i];
    }
    const double n = static_cast<double>(steps.size());
    for (double& cell : pooled.data) cell /= n;
    return pooled;
}

AttentionMap average_maps(const std::vector<AttentionMap>& maps) {
    if (maps.empty()) throw ContractError("average_maps: no maps to average");
    const AttentionMap& first = maps.front();
    AttentionMap averaged;
    averaged.height = first.height;
    averaged.width = first.width;
    averaged.data.assign(first.data.size(), 0.0);
    std::string phrase;
    for (const AttentionMap& map : maps) {
        if (map.height != first.height || map.width != first.width ||
            map.data.size() != first.data.size()) {
            throw ContractError("average_maps: mixed map shapes under token '" + map.token + "'");
        }
        for (std::size_t i = 0; i < map.data.size(); ++i) averaged.data[i] += map.data[i];
        if (!phrase.empty()) phrase += ' ';
        phrase += map.token;
    }
    averaged.token = phrase;
    const double n = static_cast<double>(maps.size());
    for (double& cell : averaged.data) cell /= n;
    return averaged;
}

double spread(const AttentionMap& map) {
    check_shape("spread('" + map.token + "')", map.height, map.width, map.data.size());
    const auto cells = static_cast<std::size_t>(map.height) * static_cast<std::size_t>(map.width);
    if (cells == 1) return 0.0;  // a single cell cannot disperse
    double entropy = 0.0;
    for (double a : map.data) {
        if (a < 0.0) {
            throw ContractError("spread('" + map.token + "'): negative probability mass");
        }
        if (a > 0.0) entropy -= a * std::log(a);
    }
    return entropy / std::log(static_cast<double>(cells));
}

double concept_spread(const ImageRecord& image, const std::string& phrase) {
    std::vector<AttentionMap> maps;
    std::istringstream words(phrase);
    std::string token;
    while (words >> token) {
        const auto it = image.attention.find(token);
        if (it == image.attention.end()) {
            throw LookupError("concept_spread: no attention map for token '" + token +
                              "' in image of prompt '" + image.prompt_id + "'");
        }
        maps.push_back(normalize_grid(token, it->second));
    }
    if (maps.empty()) throw ContractError("concept_spread: empty concept phrase");
    return spread(average_maps(maps));
}

CorrelationResult correlate_spread_with_accuracy(const std::vector<ScatterPoint>& points) {
    if (points.size() < 3) {
        throw ContractError("correlation needs at least 3 points, got " +
                            std::to_string(points.size()));
    }
    const double n = static_cast<double>(points.size());
    double mean_x = 0.0, mean_y = 0.0;
    for (const ScatterPoint& p : points) {
        mean_x += p.target_accuracy;
        mean_y += p.mean_spread;
    }
    mean_x /= n;
    mean_y /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (const ScatterPoint& p : points) {
        const double dx = p.target_accuracy - mean_x;
        const double dy = p.mean_spread - mean_y;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    CorrelationResult result;
    result.n = points.size();
    result.points = points;
    if (sxx > 0.0 && syy > 0.0) result.r = sxy / std::sqrt(sxx * syy);
    return result;
}

}  // namespace see
