#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "see/commands.hpp"
#include "see/report.hpp"
#include "see/svg_plot.hpp"
#include "test_helpers.hpp"

using namespace see;
namespace fs = std::filesystem;

namespace {

MetricSummary row(const std::string& model, const std::string& verifier, Dimension dim,
                  const std::string& group, double mean, double std_dev, std::size_t n) {
    return MetricSummary{model, verifier, dim, group, mean, std_dev, n};
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("csv escaping quotes only when needed") {
    CHECK(csv_escape("plain") == "plain");
    CHECK(csv_escape("edit[1,2)") == "\"edit[1,2)\"");
    CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK(csv_escape("two\nlines") == "\"two\nlines\"");
}

TEST_CASE("text tables render to csv and markdown") {
    TextTable table;
    table.header = {"model", "metric", "CLIP"};
    table.rows = {{"unedited", "erase set", "100.00 ± 0.00"},
                  {"cet", "bin[0,1)", "0.00 ± 0.00"}};

    CHECK(table_to_csv(table) ==
          "model,metric,CLIP\n"
          "unedited,erase set,100.00 ± 0.00\n"
          "cet,\"bin[0,1)\",0.00 ± 0.00\n");

    const std::string md = table_to_md(table);
    CHECK(md.find("| model | metric | CLIP |") == 0);
    CHECK(md.find("| --- | --- | --- |") != std::string::npos);
    CHECK(md.find("| unedited | erase set | 100.00 ± 0.00 |") != std::string::npos);
}

TEST_CASE("summary csv sorts rows and is input-order independent") {
    std::vector<MetricSummary> rows{
        row("m2", "CLIP", Dimension::neighbor_erase, "overall", 50.0, 1.25, 10),
        row("m1", "BLIP", Dimension::neighbor_preserve, "edit[1,2)", 100.0, 0.0, 36),
        row("m1", "BLIP", Dimension::neighbor_erase, "edit[0,1)", 0.0, 0.0, 4),
    };
    const std::string csv = render_summary_csv(rows);
    CHECK(csv ==
          "model_id,verifier_id,dimension,group,mean,std,n\n"
          "m1,BLIP,neighbor_erase,\"edit[0,1)\",0.0000,0.0000,4\n"
          "m1,BLIP,neighbor_preserve,\"edit[1,2)\",100.0000,0.0000,36\n"
          "m2,CLIP,neighbor_erase,overall,50.0000,1.2500,10\n");

    std::swap(rows[0], rows[2]);
    CHECK(render_summary_csv(rows) == csv);
}

TEST_CASE("accuracy table pivots overall rows into verifier columns") {
    const std::vector<MetricSummary> summaries{
        row("base", "CLIP", Dimension::neighbor_erase, "overall", 100.0, 0.0, 256),
        row("base", "BLIP", Dimension::neighbor_erase, "overall", 97.5, 1.25, 256),
        row("base", "CLIP", Dimension::neighbor_preserve, "overall", 100.0, 0.0, 320),
        row("edited", "CLIP", Dimension::neighbor_erase, "overall", 0.0, 0.0, 256),
        // bin rows must be ignored by the pivot
        row("edited", "CLIP", Dimension::neighbor_erase, "edit[0,1)", 12.0, 3.0, 4),
    };
    const std::map<std::string, std::string> labels{{"base", "unedited"}, {"edited", "uce"}};

    const TextTable table = build_accuracy_table(summaries, "neighbors", {"base", "edited"},
                                                 labels, {"CLIP", "BLIP"});
    REQUIRE(table.header == std::vector<std::string>{"model", "metric", "CLIP", "BLIP"});
    REQUIRE(table.rows.size() == 3);  // edited has no preserve rows -> skipped
    CHECK(table.rows[0] ==
          std::vector<std::string>{"unedited", "erase set", "100.00 ± 0.00",
                                   "97.50 ± 1.25"});
    CHECK(table.rows[1] ==
          std::vector<std::string>{"unedited", "preserve set", "100.00 ± 0.00", "n/a"});
    CHECK(table.rows[2] ==
          std::vector<std::string>{"uce", "erase set", "0.00 ± 0.00", "n/a"});

    CHECK_THROWS_AS(build_accuracy_table(summaries, "schedule", {"base"}, labels, {"CLIP"}),
                    ContractError);
}

TEST_CASE("family breakdown table lists size/color/material per metric") {
    const std::vector<MetricSummary> summaries{
        row("m", "CLIP", Dimension::leakage_target, "size", 0.0, 0.0, 12),
        row("m", "CLIP", Dimension::leakage_target, "color", 0.0, 0.0, 12),
        row("m", "CLIP", Dimension::leakage_preserve, "material", 100.0, 0.0, 12),
        row("m", "CLIP", Dimension::leakage_preserve, "overall", 100.0, 0.0, 36),
    };
    const TextTable table =
        build_family_breakdown_table(summaries, {"m"}, {{"m", "uce"}}, {"CLIP"});
    REQUIRE(table.header ==
            std::vector<std::string>{"model", "metric", "attribute family", "CLIP"});
    REQUIRE(table.rows.size() == 3);
    CHECK(table.rows[0] == std::vector<std::string>{"uce", "target phrase", "size",
                                                    "0.00 ± 0.00"});
    CHECK(table.rows[1] == std::vector<std::string>{"uce", "target phrase", "color",
                                                    "0.00 ± 0.00"});
    CHECK(table.rows[2] == std::vector<std::string>{"uce", "preserve phrase", "material",
                                                    "100.00 ± 0.00"});
}

TEST_CASE("schedule table") {
    const TextTable table = build_schedule_table({1, 2, 3}, {0.0, 0.0, 0.0}, {0.0, 50.0, 200.0 / 3});
    REQUIRE(table.rows.size() == 3);
    CHECK(table.rows[1] == std::vector<std::string>{"2", "0.00", "50.00"});
    CHECK(table.rows[2] == std::vector<std::string>{"3", "0.00", "66.67"});
    CHECK_THROWS_AS(build_schedule_table({1, 2}, {0.0}, {0.0, 1.0}), ContractError);
}

TEST_CASE("bin labels expose their lower edge") {
    CHECK(bin_lower_edge("edit[1,2)") == 1.0);
    CHECK(bin_lower_edge("edit[0,1)") == 0.0);
    CHECK(bin_lower_edge("cos[0.85,0.90)") == doctest::Approx(0.85));
    CHECK(bin_lower_edge("cos[-0.10,-0.05)") == doctest::Approx(-0.10));
    CHECK_FALSE(bin_lower_edge("overall").has_value());
    CHECK_FALSE(bin_lower_edge("size").has_value());
    CHECK_FALSE(bin_lower_edge("k=3").has_value());
}

TEST_CASE("svg plots are deterministic, escaped, and reject empty input") {
    PlotSeries s1{"cet <1> & \"q\"", {{0.0, 10.0}, {1.0, 50.0}, {2.0, 90.0}}, true, true};
    PlotSeries s2{"baseline", {{0.0, 100.0}, {2.0, 100.0}}, true, false};
    PlotOptions options;
    options.title = "title & <tag>";
    options.x_label = "x";
    options.y_label = "y";

    const std::string svg = render_plot_svg({s1, s2}, options);
    CHECK(svg == render_plot_svg({s1, s2}, options));  // byte-identical

    CHECK(svg.rfind("<svg ", 0) == 0);
    CHECK(svg.find("<polyline") != std::string::npos);
    CHECK(svg.find("<circle") != std::string::npos);
    CHECK(svg.find("cet &lt;1&gt; &amp; &quot;q&quot;") != std::string::npos);
    CHECK(svg.find("title &amp; &lt;tag&gt;") != std::string::npos);
    CHECK(svg.find("title & <tag>") == std::string::npos);

    CHECK_THROWS_AS(render_plot_svg({}, options), ContractError);
    CHECK_THROWS_AS(render_plot_svg({PlotSeries{"empty", {}, true, true}}, options),
                    ContractError);
    PlotSeries nan_series{"bad", {{0.0, std::nan("")}}, true, true};
    CHECK_THROWS_AS(render_plot_svg({nan_series}, options), ContractError);

    // Degenerate ranges (single point) still render.
    const std::string dot =
        render_plot_svg({PlotSeries{"one", {{1.0, 50.0}}, true, true}}, options);
    CHECK(dot.find("<circle") != std::string::npos);
}

TEST_CASE("manifest serialization round-trips") {
    RunManifest manifest;
    manifest.run_id = "r-abc";
    manifest.dimension = "leakage";
    manifest.created_at = "2026-02-03T04:05:06Z";
    manifest.tree_digest = "t-1";
    manifest.corpus_digest = "c-1";
    manifest.generator_version = "see-corpus-1";
    manifest.config_json = "{\n  \"backend\": \"mock\"\n}";
    manifest.analysis_json = R"({"points": []})";
    GeneratorHandle handle;
    handle.model_id = "m-1";
    handle.capabilities = Capabilities{true, 2};
    handle.provenance = {EditRequest{"uce", "base", {"cup", "red cup"}, EditMode::single_call}};
    manifest.models = {handle};
    manifest.model_labels = {{"m-1", "uce (full erase set)"}};
    manifest.verifier_versions = {{"CLIP", "1"}, {"BLIP", "2"}};
    manifest.leakage_pairing = {{"cup", {"car", "bench", "bird"}}};
    manifest.notes = {"note one", "note two"};
    manifest.gap_count = 3;

    const std::string text = manifest_to_json(manifest);
    const RunManifest decoded = manifest_from_json(text);

    CHECK(decoded.run_id == manifest.run_id);
    CHECK(decoded.dimension == manifest.dimension);
    CHECK(decoded.created_at == manifest.created_at);
    CHECK(decoded.tree_digest == manifest.tree_digest);
    CHECK(decoded.corpus_digest == manifest.corpus_digest);
    CHECK(decoded.generator_version == manifest.generator_version);
    CHECK(nlohmann::json::parse(decoded.config_json) ==
          nlohmann::json::parse(manifest.config_json));
    CHECK(nlohmann::json::parse(decoded.analysis_json) ==
          nlohmann::json::parse(manifest.analysis_json));
    REQUIRE(decoded.models.size() == 1);
    CHECK(decoded.models[0].model_id == "m-1");
    CHECK(decoded.models[0].capabilities.returns_attention_maps);
    CHECK(decoded.models[0].provenance == handle.provenance);
    CHECK(decoded.model_labels == manifest.model_labels);
    CHECK(decoded.verifier_versions == manifest.verifier_versions);
    CHECK(decoded.leakage_pairing == manifest.leakage_pairing);
    CHECK(decoded.notes == manifest.notes);
    CHECK(decoded.gap_count == 3);

    CHECK_THROWS_AS(manifest_from_json("not json"), ConfigError);
    CHECK_THROWS_AS(manifest_from_json(R"({"run_id": "r"})"), ConfigError);
}

TEST_CASE("gen-corpus command writes the full corpus") {
    const fs::path dir = fresh_dir("see_test_gencorpus");
    const CorpusOutcome outcome = cmd_gen_corpus(dir.string());
    CHECK(outcome.records == 5056);

    std::ifstream in(outcome.corpus_path);
    REQUIRE(in.good());
    std::size_t lines = 0;
    std::string line;
    while (std::getline(in, line)) ++lines;
    CHECK(lines == 5056);

    const auto manifest = nlohmann::json::parse(read_text_file(outcome.manifest_path));
    CHECK(manifest.at("records").get<std::size_t>() == 5056);
}

TEST_CASE("run command is deterministic and reports re-render byte-identically") {
    const fs::path dir_a = fresh_dir("see_test_run_a");
    const fs::path dir_b = fresh_dir("see_test_run_b");

    RunConfig config = parse_run_config(R"({
        "target": "cup", "preserve_limit": 8, "parallelism": 4
    })");

    config.out_dir = dir_a.string();
    const RunOutcome first = cmd_run(config, "neighbors");
    CHECK(first.gap_count == 0);
    config.out_dir = dir_b.string();
    config.parallelism = 1;  // parallelism degree must not change any output byte
    const RunOutcome second = cmd_run(config, "neighbors");

    // parallelism is part of the run id (it is configuration), so the ids
    // differ; the contract is that the measurement bytes do not.
    CHECK(first.run_id != second.run_id);
    CHECK(read_text_file(first.run_dir + "/records.jsonl") ==
          read_text_file(second.run_dir + "/records.jsonl"));
    CHECK(read_text_file(first.run_dir + "/summary.csv") ==
          read_text_file(second.run_dir + "/summary.csv"));

    // Artifact inventory.
    for (const char* name : {"manifest.json", "records.jsonl", "summary.csv"}) {
        CAPTURE(name);
        CHECK(fs::exists(fs::path(first.run_dir) / name));
    }
    CHECK_FALSE(fs::exists(fs::path(first.run_dir) / "gaps.jsonl"));

    // Reports re-render byte-identically.
    const std::vector<std::string> csv_files = cmd_report(first.run_dir, "csv");
    REQUIRE_FALSE(csv_files.empty());
    std::map<std::string, std::string> before;
    for (const auto& path : csv_files) before[path] = read_text_file(path);
    for (const auto& path : cmd_report(first.run_dir, "csv")) {
        CAPTURE(path);
        CHECK(read_text_file(path) == before.at(path));
    }

    // summary.csv written by run equals the report's re-render.
    CHECK(read_text_file(first.run_dir + "/summary.csv") ==
          before.at(first.run_dir + "/summary.csv"));

    const std::vector<std::string> plot_files = cmd_report(first.run_dir, "plots");
    REQUIRE_FALSE(plot_files.empty());
    for (const auto& path : plot_files) {
        CAPTURE(path);
        CHECK(read_text_file(path).rfind("<svg ", 0) == 0);
    }

    // The accuracy table carries all four verifier columns.
    const std::string table = read_text_file(first.run_dir + "/table_neighbors.csv");
    for (const char* verifier : {"CLIP", "QWEN2.5VL", "BLIP", "Florence-2-base"}) {
        CAPTURE(verifier);
        CHECK(table.find(verifier) != std::string::npos);
    }
}

TEST_CASE("summary rows include per-bin groups plus overall rows") {
    const fs::path dir = fresh_dir("see_test_summary_rows");
    RunConfig config = parse_run_config(R"({"target": "cup", "preserve_limit": 4})");
    config.out_dir = dir.string();
    const RunOutcome outcome = cmd_run(config, "neighbors");

    const std::vector<EvalRecord> records =
        eval_records_from_jsonl(read_text_file(outcome.run_dir + "/records.jsonl"));
    const std::vector<MetricSummary> rows = summary_rows_for(records);

    std::size_t overall = 0, binned = 0;
    for (const auto& r : rows) {
        if (r.group == "overall") ++overall;
        else ++binned;
    }
    // 2 models x 4 verifiers x (erase + preserve) = 16 overall rows.
    CHECK(overall == 16);
    CHECK(binned > 0);
}

TEST_CASE("gaps produce gaps.jsonl and a non-zero gap count") {
    const fs::path dir = fresh_dir("see_test_gaps");
    RunConfig config = parse_run_config(R"({
        "target": "cup", "preserve_limit": 4, "parallelism": 4,
        "mock": {"fail_substring": "wooden cup"}
    })");
    config.out_dir = dir.string();
    const RunOutcome outcome = cmd_run(config, "neighbors");
    CHECK(outcome.gap_count > 0);
    REQUIRE(fs::exists(fs::path(outcome.run_dir) / "gaps.jsonl"));

    const std::string gaps = read_text_file(outcome.run_dir + "/gaps.jsonl");
    CHECK(gaps.find("wooden cup") != std::string::npos);
    const auto first_line = nlohmann::json::parse(gaps.substr(0, gaps.find('\n')));
    CHECK(first_line.contains("prompt_id"));
    CHECK(first_line.contains("seed"));
    CHECK(first_line.contains("reason"));
}

TEST_CASE("run directory resolution accepts paths and bare ids") {
    const fs::path root = fresh_dir("see_test_resolve");
    RunConfig config = parse_run_config(R"({"target": "cup", "preserve_limit": 2})");
    config.out_dir = root.string();
    const RunOutcome outcome = cmd_run(config, "neighbors");

    CHECK(resolve_run_dir(outcome.run_dir) == outcome.run_dir);
    CHECK(resolve_run_dir(outcome.run_id, root.string()) ==
          (root / outcome.run_id).string());
    CHECK_THROWS_AS(resolve_run_dir("no-such-run", root.string()), LookupError);
}

TEST_CASE("unknown dimension and unknown format are config errors") {
    RunConfig config;
    CHECK_THROWS_WITH_AS(cmd_run(config, "sideways"),
                         "unknown dimension 'sideways' (expected one of: neighbors, evasion, "
                         "leakage, schedule, attention)",
                         ConfigError);

    const fs::path root = fresh_dir("see_test_badformat");
    RunConfig small = parse_run_config(R"({"target": "cup", "preserve_limit": 2})");
    small.out_dir = root.string();
    const RunOutcome outcome = cmd_run(small, "neighbors");
    CHECK_THROWS_AS(cmd_report(outcome.run_dir, "xml"), ConfigError);
}
