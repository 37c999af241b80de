#include <doctest.h>

#include <cmath>
#include <deque>
#include <map>
#include <set>

#include "see/distance.hpp"
#include "see/prompts.hpp"
#include "see/util.hpp"
#include "test_helpers.hpp"

using namespace see;
using see::testing::shared_tree;

namespace {

// Independent oracle: breadth-first search over the edit graph whose states
// are attribute maps and whose moves are single-slot additions, deletions,
// and substitutions.  Deliberately knows nothing about "count differing
// slots".
int bfs_edit_distance(const AttributeMap& start, const AttributeMap& goal,
                      const AttributeVocabulary& vocab) {
    if (start == goal) return 0;
    std::map<AttributeMap, int> dist{{start, 0}};
    std::deque<AttributeMap> queue{start};
    while (!queue.empty()) {
        const AttributeMap state = queue.front();
        queue.pop_front();
        const int d = dist[state];
        std::vector<AttributeMap> moves;
        for (const char* slot : kSlotOrder) {
            auto it = state.find(slot);
            if (it == state.end()) {
                for (const auto& value : vocab.values(slot)) {  // addition
                    AttributeMap next = state;
                    next[slot] = value;
                    moves.push_back(std::move(next));
                }
            } else {
                AttributeMap without = state;  // deletion
                without.erase(slot);
                moves.push_back(std::move(without));
                for (const auto& value : vocab.values(slot)) {  // substitution
                    if (value == it->second) continue;
                    AttributeMap next = state;
                    next[slot] = value;
                    moves.push_back(std::move(next));
                }
            }
        }
        for (auto& next : moves) {
            if (dist.count(next)) continue;
            if (next == goal) return d + 1;
            dist[next] = d + 1;
            queue.push_back(next);
        }
    }
    FAIL("edit graph is connected; unreachable");
    return -1;
}

const std::vector<PromptRecord>& cup_family() {
    static const std::vector<PromptRecord> records = enumerate_variants(
        shared_tree(), shared_tree().node("kitchen/cup"), AttributeVocabulary{});
    return records;
}

}  // namespace

TEST_CASE("edit distance equals the brute-force oracle on all 64x64 cup pairs") {
    const AttributeVocabulary vocab;
    const auto& family = cup_family();
    REQUIRE(family.size() == 64);
    for (const auto& a : family) {
        for (const auto& b : family) {
            const int fast = attribute_edit_distance(a, b);
            const int oracle = bfs_edit_distance(a.attributes, b.attributes, vocab);
            CHECK_MESSAGE(fast == oracle, a.class_label, " vs ", b.class_label);
        }
    }
}

TEST_CASE("edit distance satisfies the metric axioms over the cup family") {
    const auto& family = cup_family();
    std::vector<AttributeMap> maps;
    for (const auto& record : family) maps.push_back(record.attributes);

    for (std::size_t i = 0; i < maps.size(); ++i) {
        CHECK(attribute_edit_distance(maps[i], maps[i]) == 0);
        for (std::size_t j = 0; j < maps.size(); ++j) {
            const int dij = attribute_edit_distance(maps[i], maps[j]);
            CHECK(dij == attribute_edit_distance(maps[j], maps[i]));  // symmetry
            CHECK((dij == 0) == (maps[i] == maps[j]));  // identity of indiscernibles
            CHECK(dij >= 0);
            CHECK(dij <= 3);
        }
    }
    // Triangle inequality over all 64^3 triples.
    std::vector<std::vector<int>> d(maps.size(), std::vector<int>(maps.size()));
    for (std::size_t i = 0; i < maps.size(); ++i) {
        for (std::size_t j = 0; j < maps.size(); ++j) {
            d[i][j] = attribute_edit_distance(maps[i], maps[j]);
        }
    }
    for (std::size_t i = 0; i < maps.size(); ++i) {
        for (std::size_t j = 0; j < maps.size(); ++j) {
            for (std::size_t k = 0; k < maps.size(); ++k) {
                REQUIRE(d[i][k] <= d[i][j] + d[j][k]);
            }
        }
    }
}

TEST_CASE("bare-to-variant distance equals the variant's filled-slot count") {
    const auto& family = cup_family();
    const AttributeMap bare;
    for (const auto& record : family) {
        CHECK(attribute_edit_distance(bare, record.attributes) ==
              static_cast<int>(record.attributes.size()));
    }
}

TEST_CASE("spec examples for edit distance") {
    const AttributeMap car{};
    const AttributeMap red_car{{"color", "red"}};
    CHECK(attribute_edit_distance(car, red_car) == 1);

    const AttributeMap srw{{"size", "small"}, {"color", "red"}, {"material", "wooden"}};
    const AttributeMap lb{{"size", "large"}, {"color", "blue"}};
    CHECK(attribute_edit_distance(srw, lb) == 3);
}

TEST_CASE("cross-object records have no edit distance") {
    const ConceptTree& tree = shared_tree();
    const auto cups = enumerate_variants(tree, tree.node("kitchen/cup"), AttributeVocabulary{});
    const auto forks = enumerate_variants(tree, tree.node("kitchen/fork"), AttributeVocabulary{});
    CHECK_THROWS_AS(attribute_edit_distance(cups[0], forks[0]), ContractError);
    CHECK_THROWS_WITH_AS(attribute_edit_distance(cups[0], forks[0]),
                         doctest::Contains("cosine"), ContractError);
}

TEST_CASE("hash embedder is deterministic and cosine obeys its contract") {
    auto embedder = make_hash_embedder(64);
    CHECK(embedder->id() == "hash-64");
    CHECK(embedder->embed("red cup") == embedder->embed("red cup"));
    CHECK(embedder->embed("red cup").size() == 64);

    CHECK(embedding_similarity("cup", "cup", *embedder) == doctest::Approx(1.0).epsilon(1e-6));
    const double ab = embedding_similarity("red cup", "cup", *embedder);
    const double ba = embedding_similarity("cup", "red cup", *embedder);
    CHECK(ab == ba);  // exact: same dot product
    CHECK(ab >= -1.0);
    CHECK(ab <= 1.0);

    // Shared-token phrases sit closer than disjoint ones under the hash
    // embedder (token vectors sum), mirroring the intended usage.
    const double related = embedding_similarity("red car", "car", *embedder);
    const double unrelated = embedding_similarity("toothbrush", "car", *embedder);
    CHECK(related > unrelated);

    CHECK_THROWS_AS(embedding_similarity("", "cup", *embedder), ContractError);
    CHECK_THROWS_AS(make_embedder("clip-vit"), ConfigError);
    CHECK(make_embedder("hash-32")->id() == "hash-32");
}

TEST_CASE("bin_concepts assigns half-open bins with clamping") {
    using Pair = std::pair<std::string, double>;
    const std::vector<Pair> pairs = {
        {"a", 0.0}, {"b", 1.0}, {"c", 2.0}, {"d", 3.0}, {"e", 2.5}, {"f", -0.5}, {"g", 9.0},
    };
    const std::vector<double> edges = {0, 1, 2, 3, 4};
    const auto bins = bin_concepts(pairs, edges, DistanceKind::edit_distance);
    REQUIRE(bins.size() == 4);
    CHECK(bins[0].members == std::vector<std::string>{"a", "f"});
    CHECK(bins[0].clamped);
    CHECK(bins[1].members == std::vector<std::string>{"b"});
    CHECK_FALSE(bins[1].clamped);
    CHECK(bins[2].members == std::vector<std::string>{"c", "e"});
    CHECK(bins[3].members == std::vector<std::string>{"d", "g"});
    CHECK(bins[3].clamped);

    // Mass conservation.
    std::size_t total = 0;
    for (const auto& bin : bins) total += bin.members.size();
    CHECK(total == pairs.size());

    // Cup variants vs bare cup land in bins sized (1, 9, 27, 27).
    std::vector<Pair> distances;
    for (const auto& record : cup_family()) {
        distances.emplace_back(record.prompt_id,
                               attribute_edit_distance(AttributeMap{}, record.attributes));
    }
    const auto curve = bin_concepts(distances, edges, DistanceKind::edit_distance);
    CHECK(curve[0].members.size() == 1);
    CHECK(curve[1].members.size() == 9);
    CHECK(curve[2].members.size() == 27);
    CHECK(curve[3].members.size() == 27);

    CHECK_THROWS_AS(bin_concepts(pairs, {1.0}, DistanceKind::edit_distance), ContractError);
    CHECK_THROWS_AS(bin_concepts(pairs, {1.0, 1.0}, DistanceKind::edit_distance), ContractError);

    // Empty input: bins preserved, all empty.
    const auto empty_bins = bin_concepts({}, edges, DistanceKind::cosine_similarity);
    REQUIRE(empty_bins.size() == 4);
    for (const auto& bin : empty_bins) CHECK(bin.members.empty());
}
