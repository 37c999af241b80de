// Acceptance suite: one pass/fail line per criterion, exit code = number of
// failures.  Everything runs against the mock backend and the oracle
// verifier — no GPU, no network, no external state beyond a temp directory.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "see/attention.hpp"
#include "see/catalog.hpp"
#include "see/coco.hpp"
#include "see/commands.hpp"
#include "see/distance.hpp"
#include "see/eval.hpp"
#include "see/mock.hpp"
#include "see/prompts.hpp"
#include "see/report.hpp"
#include "see/util.hpp"

using namespace see;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void criterion(const std::string& name, const std::function<void()>& body) {
    try {
        body();
        std::cout << "[PASS] " << name << "\n";
    } catch (const std::exception& error) {
        ++g_failures;
        std::cout << "[FAIL] " << name << " -- " << error.what() << "\n";
    }
}

void expect(bool condition, const std::string& message) {
    if (!condition) throw std::runtime_error(message);
}

template <typename T>
void expect_eq(const T& actual, const T& wanted, const std::string& what) {
    if (!(actual == wanted)) {
        std::ostringstream message;
        message << what << ": got " << actual << ", wanted " << wanted;
        throw std::runtime_error(message.str());
    }
}

const std::shared_ptr<const ConceptTree>& tree_ptr() {
    static const auto tree = std::make_shared<const ConceptTree>(
        build_catalog(default_superclass_table(), AttributeVocabulary{}));
    return tree;
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    expect(in.good(), "cannot open " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "see_acceptance" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

/// Mock stack + oracle wired into an EvalContext, single "oracle" verifier.
struct Rig {
    std::shared_ptr<MockStack> mock;
    ModelGateway gateway;
    VerifierBank bank;
    GeneratorHandle base;
    EvalContext ctx;

    explicit Rig(MockConfig config = MockConfig{})
        : mock(std::make_shared<MockStack>(tree_ptr(), config)),
          gateway(mock, mock),
          base(gateway.register_base(kMockBaseModelId)) {
        bank.register_backend(std::make_shared<OracleVerifier>(tree_ptr()));
        ctx.tree = tree_ptr();
        ctx.gateway = &gateway;
        ctx.bank = &bank;
        ctx.verifiers = {VerifierSpec{"oracle", ProbeMode::vqa}};
        ctx.parallelism = 4;
    }

    GeneratorHandle erase(const std::vector<std::string>& targets,
                          EditMode mode = EditMode::single_call) {
        EditRequest request;
        request.cet_name = "mock-cet";
        request.targets = targets;
        request.mode = mode;
        return gateway.apply_erasure(base, request);
    }
};

std::vector<EvalRecord> pick(const std::vector<EvalRecord>& records, const std::string& model_id,
                             Dimension dimension) {
    std::vector<EvalRecord> out;
    for (const EvalRecord& r : records) {
        if (r.model_id == model_id && r.dimension == dimension) out.push_back(r);
    }
    return out;
}

std::vector<std::string> erase_set_names(const ConceptTree& tree, const std::string& phrase) {
    std::vector<std::string> names;
    for (const std::string& id : erase_set(tree, tree.find_by_name(phrase).id)) {
        names.push_back(tree.node(id).name);
    }
    return names;
}

// Independent oracle for criterion 3: breadth-first search over single-slot
// additions, deletions, and substitutions.
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
            const auto it = state.find(slot);
            if (it == state.end()) {
                for (const auto& value : vocab.values(slot)) {
                    AttributeMap next = state;
                    next[slot] = value;
                    moves.push_back(std::move(next));
                }
            } else {
                AttributeMap without = state;
                without.erase(slot);
                moves.push_back(std::move(without));
                for (const auto& value : vocab.values(slot)) {
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
    throw std::runtime_error("edit graph unexpectedly disconnected");
}

std::string data_dir() { return std::string(SEE_TEST_DATA_DIR); }

}  // namespace

int main() {
    const AttributeVocabulary vocab;

    criterion("corpus exactness: 5056 records, 64 per object, arity (1,9,27,27), under 10 s",
              [&] {
                  const auto start = std::chrono::steady_clock::now();
                  const ConceptTree tree = build_catalog(default_superclass_table(), vocab);
                  const std::vector<PromptRecord> corpus = build_corpus(tree, vocab);
                  const double elapsed =
                      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                          .count();

                  expect_eq(corpus.size(), std::size_t{5056}, "corpus size");
                  std::map<std::string, std::size_t> per_object;
                  std::map<std::string, std::map<std::size_t, std::size_t>> arity;
                  for (const PromptRecord& record : corpus) {
                      ++per_object[record.object_id];
                      ++arity[record.object_id][record.attributes.size()];
                  }
                  expect_eq(per_object.size(), std::size_t{79}, "distinct objects");
                  for (const auto& [object_id, count] : per_object) {
                      expect(count == 64, object_id + " has " + std::to_string(count) +
                                              " records, wanted 64");
                      const auto& a = arity[object_id];
                      expect(a.at(0) == 1 && a.at(1) == 9 && a.at(2) == 27 && a.at(3) == 27,
                             object_id + " arity counts are not (1,9,27,27)");
                  }
                  expect(elapsed < 10.0,
                         "corpus generation took " + fmt_fixed(elapsed, 2) + " s (>= 10 s)");
              });

    criterion("golden erase set: erase_set(cup) matches the 64 listed phrases exactly", [&] {
        const auto& tree = *tree_ptr();
        const std::vector<std::string> phrases = erase_set_names(tree, "cup");
        const std::vector<std::string> golden = read_lines(data_dir() + "/golden/erase_set_cup.txt");
        expect_eq(golden.size(), std::size_t{64}, "golden line count");
        expect_eq(phrases.size(), std::size_t{64}, "erase set size");
        for (std::size_t i = 0; i < 64; ++i) {
            expect(phrases[i] == golden[i], "mismatch at index " + std::to_string(i) + ": '" +
                                                phrases[i] + "' vs '" + golden[i] + "'");
        }
    });

    criterion("edit distance equals brute-force search on all 64x64 variant pairs", [&] {
        const auto& tree = *tree_ptr();
        const std::vector<PromptRecord> family =
            enumerate_variants(tree, tree.node("kitchen/cup"), vocab);
        expect_eq(family.size(), std::size_t{64}, "family size");
        for (const PromptRecord& a : family) {
            for (const PromptRecord& b : family) {
                const int fast = attribute_edit_distance(a.attributes, b.attributes);
                const int slow = bfs_edit_distance(a.attributes, b.attributes, vocab);
                expect(fast == slow, a.class_label + " vs " + b.class_label + ": got " +
                                         std::to_string(fast) + ", brute force says " +
                                         std::to_string(slow));
            }
        }
    });

    criterion("edit distance satisfies identity, symmetry, and the triangle inequality", [&] {
        const auto& tree = *tree_ptr();
        const std::vector<PromptRecord> family =
            enumerate_variants(tree, tree.node("kitchen/cup"), vocab);
        std::vector<AttributeMap> maps;
        for (const PromptRecord& record : family) maps.push_back(record.attributes);

        const std::size_t n = maps.size();
        std::vector<std::vector<int>> d(n, std::vector<int>(n));
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                d[i][j] = attribute_edit_distance(maps[i], maps[j]);
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            expect(d[i][i] == 0, "self-distance not zero");
            for (std::size_t j = 0; j < n; ++j) {
                expect(d[i][j] == d[j][i], "asymmetric pair");
                expect((d[i][j] == 0) == (maps[i] == maps[j]), "identity of indiscernibles");
                expect(d[i][j] >= 0, "negative distance");
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                for (std::size_t k = 0; k < n; ++k) {
                    expect(d[i][k] <= d[i][j] + d[j][k], "triangle inequality violated");
                }
            }
        }
    });

    criterion("perfect erasure: target accuracy 0.00%, preserve accuracy 100.00%, exact", [&] {
        Rig rig;  // r = 0: no collateral
        const GeneratorHandle erased = rig.erase(erase_set_names(*rig.ctx.tree, "cup"));
        const DimensionResult result =
            run_neighbor_dimension(rig.ctx, "cup", {erased.model_id});
        expect(result.gaps.empty(), "unexpected generation gaps");

        const MetricSummary target =
            target_accuracy(pick(result.records, erased.model_id, Dimension::neighbor_erase));
        expect(target.mean == 0.0 && target.std_dev == 0.0,
               "target accuracy " + fmt_fixed(target.mean, 2) + " +/- " +
                   fmt_fixed(target.std_dev, 2) + ", wanted exactly 0.00 +/- 0.00");
        expect_eq(target.n, std::size_t{64 * 4}, "target verdict count");

        const MetricSummary preserve =
            preserve_accuracy(pick(result.records, erased.model_id, Dimension::neighbor_preserve));
        expect(preserve.mean == 100.0 && preserve.std_dev == 0.0,
               "preserve accuracy " + fmt_fixed(preserve.mean, 2) + " +/- " +
                   fmt_fixed(preserve.std_dev, 2) + ", wanted exactly 100.00 +/- 0.00");
        expect_eq(preserve.n, std::size_t{(5056 - 64) * 4}, "preserve verdict count");
    });

    criterion("collateral localization: deficit only within radius 1, exact vs suppression set",
              [&] {
                  MockConfig config;
                  config.collateral_radius = 1;
                  config.collateral_probability = 1.0;
                  Rig rig(config);
                  const GeneratorHandle erased = rig.erase({"red cup"});
                  const DimensionResult result =
                      run_neighbor_dimension(rig.ctx, "red cup", {erased.model_id});

                  // Brute-force reference: the mock's own suppression table.
                  EditRequest request;
                  request.cet_name = "mock-cet";
                  request.base_model_id = kMockBaseModelId;
                  request.targets = {"red cup"};
                  const std::set<std::string> suppressed =
                      rig.mock->suppression_set(rig.mock->apply(request));

                  for (const EvalRecord& r : result.records) {
                      const bool expect_present = suppressed.count(r.concept_id) == 0;
                      expect(r.outcomes.size() == 4, "missing seeds on " + r.concept_id);
                      for (const Outcome o : r.outcomes) {
                          expect(o == (expect_present ? Outcome::present : Outcome::absent),
                                 "verdict for " + r.concept_id +
                                     " disagrees with the brute-force suppression set");
                      }
                  }

                  for (const MetricSummary& s : summarize(
                           pick(result.records, erased.model_id, Dimension::neighbor_preserve))) {
                      if (s.group == "edit[1,2)") {
                          expect(s.mean == 0.0, "distance-1 bin reports " +
                                                    fmt_fixed(s.mean, 2) + "%, wanted 0%");
                      } else {
                          expect(s.mean == 100.0, "bin " + s.group + " reports " +
                                                      fmt_fixed(s.mean, 2) +
                                                      "%, wanted exactly 100%");
                      }
                  }
              });

    criterion("evasion: bare-token erasure reports 100%, full erase set reports 0%", [&] {
        Rig rig;
        const auto& tree = *rig.ctx.tree;
        std::string superclass;
        std::size_t objects = SIZE_MAX;
        for (const std::string& id : tree.superclass_ids()) {
            if (tree.children(id).size() < objects) {
                objects = tree.children(id).size();
                superclass = tree.node(id).name;
            }
        }

        const GeneratorHandle bare = rig.erase({superclass});
        const GeneratorHandle full = rig.erase(erase_set_names(tree, superclass));
        const DimensionResult result =
            run_evasion_dimension(rig.ctx, superclass, {bare.model_id, full.model_id});

        const MetricSummary evaded =
            target_accuracy(pick(result.records, bare.model_id, Dimension::evasion));
        expect(evaded.mean == 100.0 && evaded.std_dev == 0.0,
               "bare-token evasion accuracy " + fmt_fixed(evaded.mean, 2) + ", wanted 100.00");
        expect_eq(evaded.n, objects * 64 * 4, "bare-token verdict count");

        const MetricSummary closed =
            target_accuracy(pick(result.records, full.model_id, Dimension::evasion));
        expect(closed.mean == 0.0 && closed.std_dev == 0.0,
               "full-erase evasion accuracy " + fmt_fixed(closed.mean, 2) + ", wanted 0.00");
    });

    criterion("leakage: golden prompt templates byte-match; transferring mock leaks 100%", [&] {
        // 20 golden template cases, tab-separated: attribute, e, p, prompt.
        const std::vector<std::string> lines =
            read_lines(data_dir() + "/golden/leakage_prompts.txt");
        expect_eq(lines.size(), std::size_t{20}, "golden case count");
        for (const std::string& line : lines) {
            std::vector<std::string> fields;
            std::size_t start = 0;
            for (std::size_t i = 0; i <= line.size(); ++i) {
                if (i == line.size() || line[i] == '\t') {
                    fields.push_back(line.substr(start, i - start));
                    start = i + 1;
                }
            }
            expect(fields.size() == 4, "malformed golden line: " + line);
            const std::string rendered = render_leakage_prompt(fields[0], fields[1], fields[2]);
            expect(rendered == fields[3],
                   "template mismatch: '" + rendered + "' vs '" + fields[3] + "'");
        }

        // Attribute-transferring mock: erasing every attributed cup variant
        // moves the attribute onto the partner object.
        MockConfig config;
        config.leak_attributes = true;
        Rig rig(config);
        std::vector<std::string> attributed;
        for (const char* slot : kSlotOrder) {
            for (const std::string& value : rig.ctx.vocab.values(slot)) {
                attributed.push_back(value + " cup");
            }
        }
        const GeneratorHandle erased = rig.erase(attributed);
        const DimensionResult result =
            run_leakage_dimension(rig.ctx, "cup", {erased.model_id});

        const MetricSummary leak =
            preserve_accuracy(pick(result.records, erased.model_id, Dimension::leakage_preserve));
        expect(leak.mean == 100.0 && leak.std_dev == 0.0,
               "preserve-phrase accuracy " + fmt_fixed(leak.mean, 2) + ", wanted exactly 100.00");
        const MetricSummary target =
            target_accuracy(pick(result.records, erased.model_id, Dimension::leakage_target));
        expect(target.mean == 0.0, "target-phrase accuracy should collapse to 0 after erasure");
    });

    criterion("attention spread: landmarks within 1e-9, scale/permutation invariant", [&] {
        auto map_of = [](int h, int w, std::vector<double> data) {
            return normalize_grid("t", AttentionGrid{h, w, std::move(data)});
        };
        expect(std::fabs(spread(map_of(3, 5, std::vector<double>(15, 0.2))) - 1.0) < 1e-9,
               "uniform map spread is not 1.0");
        std::vector<double> one_hot(16, 0.0);
        one_hot[5] = 3.0;
        expect(std::fabs(spread(map_of(4, 4, one_hot)) - 0.0) < 1e-9,
               "one-hot map spread is not 0.0");
        expect(std::fabs(spread(map_of(2, 2, {0.5, 0.5, 0.0, 0.0})) - 0.5) < 1e-9,
               "2x2 half-mass spread is not 0.5");

        std::mt19937_64 rng(20260825);
        std::uniform_real_distribution<double> mass(0.0, 1.0);
        std::uniform_real_distribution<double> scale(0.1, 50.0);
        for (int trial = 0; trial < 100; ++trial) {
            const int h = 1 + static_cast<int>(rng() % 6);
            const int w = 1 + static_cast<int>(rng() % 6);
            std::vector<double> data(static_cast<std::size_t>(h) * w);
            double total = 0.0;
            for (double& cell : data) {
                cell = mass(rng);
                total += cell;
            }
            if (total == 0.0) data[0] = 1.0;

            const double s0 = spread(map_of(h, w, data));
            expect(s0 >= 0.0 && s0 <= 1.0, "spread out of [0,1]");

            const double factor = scale(rng);
            std::vector<double> scaled = data;
            for (double& cell : scaled) cell *= factor;
            expect(std::fabs(spread(map_of(h, w, scaled)) - s0) < 1e-9,
                   "spread changed under positive rescaling");

            std::vector<double> shuffled = data;
            std::shuffle(shuffled.begin(), shuffled.end(), rng);
            expect(std::fabs(spread(map_of(h, w, shuffled)) - s0) < 1e-9,
                   "spread changed under cell permutation");
        }
    });

    criterion("schedule: progressive curve pointwise <= all-at-once for every k", [&] {
        MockConfig config;
        config.weak_single_call = true;
        Rig rig(config);
        const ScheduleResult sched =
            run_schedule_comparison(rig.ctx, "mock-cet", rig.base, "cup", 6);
        expect_eq(sched.ks.size(), std::size_t{6}, "curve length");
        for (std::size_t i = 0; i < sched.ks.size(); ++i) {
            expect(sched.progressive[i] <= sched.all_at_once[i],
                   "k=" + std::to_string(sched.ks[i]) + ": progressive " +
                       fmt_fixed(sched.progressive[i], 2) + " > all-at-once " +
                       fmt_fixed(sched.all_at_once[i], 2));
        }
        // Direction is strict once the adversarial weakness can bite (k >= 2).
        expect(sched.progressive[5] < sched.all_at_once[5],
               "expected a strict gap at k=6 under the adversarial mock");
    });

    criterion("determinism: identical configs yield byte-identical records.jsonl and summary.csv",
              [&] {
                  RunConfig config = parse_run_config(R"({"target": "cup", "parallelism": 4})");
                  config.out_dir = fresh_dir("det_a").string();
                  const RunOutcome first = cmd_run(config, "neighbors");
                  config.out_dir = fresh_dir("det_b").string();
                  const RunOutcome second = cmd_run(config, "neighbors");

                  expect(first.run_id == second.run_id, "run ids diverged");
                  expect(read_text_file(first.run_dir + "/records.jsonl") ==
                             read_text_file(second.run_dir + "/records.jsonl"),
                         "records.jsonl differs between reruns");
                  expect(read_text_file(first.run_dir + "/summary.csv") ==
                             read_text_file(second.run_dir + "/summary.csv"),
                         "summary.csv differs between reruns");
              });

    criterion("image-count bookkeeping: prompts x seeds, 2,560 on a 10-object subset", [&] {
        const auto& tree = *tree_ptr();
        const std::vector<PromptRecord> corpus = build_corpus(tree, vocab);
        expect_eq(corpus.size() * 4, std::size_t{20224}, "full-corpus image count per model");

        std::set<std::string> keep(tree.object_ids().begin(), tree.object_ids().begin() + 10);
        std::vector<GenerateRequest> requests;
        for (const PromptRecord& record : corpus) {
            if (keep.count(record.object_id) == 0) continue;
            for (std::uint32_t seed : {0u, 1u, 2u, 3u}) {
                GenerateRequest request;
                request.prompt_id = record.prompt_id;
                request.prompt = record.text;
                request.seed = seed;
                requests.push_back(std::move(request));
            }
        }
        expect_eq(requests.size(), std::size_t{2560}, "10-object subset request count");

        Rig rig;
        const GenerateBatchResult batch = rig.gateway.generate_batch(rig.base, requests);
        expect(batch.gaps.empty(), "unexpected generation gaps");
        expect_eq(batch.records.size(), std::size_t{2560}, "generated image count");
        std::set<std::pair<std::string, std::uint32_t>> distinct;
        for (const ImageRecord& record : batch.records) {
            distinct.emplace(record.prompt_id, record.seed);
        }
        expect_eq(distinct.size(), std::size_t{2560}, "distinct (prompt, seed) pairs");
    });

    criterion("report layouts: every table and figure artifact, four verifier columns", [&] {
        const std::string root = fresh_dir("smoke").string();
        const auto& tree = *tree_ptr();
        std::string smallest_superclass;
        std::size_t objects = SIZE_MAX;
        for (const std::string& id : tree.superclass_ids()) {
            if (tree.children(id).size() < objects) {
                objects = tree.children(id).size();
                smallest_superclass = tree.node(id).name;
            }
        }

        struct Smoke {
            std::string dimension;
            std::string config_json;
            std::vector<std::string> artifacts;
        };
        // preserve_limit 192 = three object families' worth of probes.
        const std::vector<Smoke> smokes{
            {"neighbors",
             R"({"target": "cup", "preserve_limit": 192, "parallelism": 4})",
             {"table_neighbors.csv", "table_neighbors.md", "summary.csv",
              "plots/neighbor_erase.svg", "plots/neighbor_preserve_similarity.svg"}},
            {"evasion",
             R"({"target": ")" + smallest_superclass + R"(", "parallelism": 4})",
             {"table_evasion.csv", "table_evasion.md", "summary.csv"}},
            {"leakage",
             R"({"target": "cup", "parallelism": 4})",
             {"table_leakage.csv", "table_leakage.md", "table_leakage_families.csv",
              "table_leakage_families.md", "summary.csv"}},
            {"schedule",
             R"({"target": "cup", "max_k": 4, "parallelism": 4,
                  "mock": {"weak_single_call": true}})",
             {"table_schedule.csv", "table_schedule.md", "summary.csv", "plots/schedule.svg"}},
            {"attention",
             R"({"target": "cup", "parallelism": 4})",
             {"table_attention.csv", "table_attention.md", "summary.csv",
              "plots/attention_scatter.svg"}},
        };

        for (const Smoke& smoke : smokes) {
            RunConfig config = parse_run_config(smoke.config_json);
            config.out_dir = root;
            const RunOutcome outcome = cmd_run(config, smoke.dimension);
            expect(outcome.gap_count == 0, smoke.dimension + ": unexpected gaps");
            cmd_report(outcome.run_dir, "csv");
            cmd_report(outcome.run_dir, "md");
            cmd_report(outcome.run_dir, "plots");
            for (const std::string& artifact : smoke.artifacts) {
                expect(fs::exists(fs::path(outcome.run_dir) / artifact),
                       smoke.dimension + ": missing artifact " + artifact);
            }
        }

        // The accuracy tables carry one column per configured verifier, in
        // config order.
        for (const char* table : {"table_neighbors.csv", "table_evasion.csv",
                                  "table_leakage.csv"}) {
            bool found = false;
            for (const auto& entry : fs::recursive_directory_iterator(root)) {
                if (entry.path().filename() == table) {
                    const std::vector<std::string> lines = read_lines(entry.path().string());
                    expect(!lines.empty(), std::string(table) + " is empty");
                    expect_eq(lines[0],
                              std::string("model,metric,CLIP,QWEN2.5VL,BLIP,Florence-2-base"),
                              std::string(table) + " header");
                    expect(lines.size() > 1, std::string(table) + " has no data rows");
                    found = true;
                }
            }
            expect(found, std::string("no run produced ") + table);
        }
    });

    std::cout << (g_failures == 0 ? "ACCEPTANCE: all criteria passed\n"
                                  : "ACCEPTANCE: " + std::to_string(g_failures) +
                                        " criterion(s) failed\n");
    return g_failures;
}
