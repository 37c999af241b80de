#include "see/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "see/coco.hpp"
#include "see/mock.hpp"
#include "see/prompts.hpp"
#include "see/protocol.hpp"
#include "see/report.hpp"
#include "see/util.hpp"

namespace see {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

bool is_known_dimension(const std::string& dimension) {
    for (const char* name : kDimensionNames) {
        if (dimension == name) return true;
    }
    return false;
}

std::string dimension_list() {
    std::vector<std::string> names(std::begin(kDimensionNames), std::end(kDimensionNames));
    return join(names, ", ");
}

std::vector<std::string> erase_names(const ConceptTree& tree, const std::string& node_id) {
    std::vector<std::string> names;
    for (const auto& id : erase_set(tree, node_id)) names.push_back(tree.node(id).name);
    return names;
}

std::string gaps_to_jsonl(std::vector<GenerationGap> gaps) {
    std::sort(gaps.begin(), gaps.end(), [](const GenerationGap& a, const GenerationGap& b) {
        return std::tie(a.prompt_id, a.seed, a.reason) < std::tie(b.prompt_id, b.seed, b.reason);
    });
    std::string out;
    for (const auto& gap : gaps) {
        out += json{{"prompt_id", gap.prompt_id}, {"reason", gap.reason}, {"seed", gap.seed}}
                   .dump() +
               "\n";
    }
    return out;
}

// Everything a run assembles before artifacts are written.
struct RunPayload {
    std::vector<EvalRecord> records;
    std::vector<GenerationGap> gaps;
    std::vector<GeneratorHandle> models;
    std::map<std::string, std::string> model_labels;
    std::map<std::string, std::vector<std::string>> leakage_pairing;
    json analysis = json::object();
};

}  // namespace

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw ConfigError("failed writing '" + path + "'");
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

CorpusOutcome cmd_gen_corpus(const std::string& out_dir) {
    const AttributeVocabulary vocab;
    const ConceptTree tree = build_catalog(default_superclass_table(), vocab);
    const std::vector<PromptRecord> corpus = build_corpus(tree, vocab);

    fs::create_directories(out_dir);
    CorpusOutcome outcome;
    outcome.corpus_path = (fs::path(out_dir) / "corpus.jsonl").string();
    outcome.manifest_path = (fs::path(out_dir) / "corpus_manifest.json").string();
    outcome.records = corpus.size();

    std::ostringstream lines;
    write_corpus(corpus, lines);
    write_text_file(outcome.corpus_path, lines.str());
    write_text_file(outcome.manifest_path, corpus_manifest_json(tree, vocab, corpus));
    return outcome;
}

std::vector<MetricSummary> summary_rows_for(const std::vector<EvalRecord>& records) {
    std::vector<MetricSummary> rows = summarize(records);

    std::map<std::tuple<std::string, std::string, std::string>, std::vector<EvalRecord>> groups;
    for (const auto& record : records) {
        groups[{record.model_id, record.verifier_id, to_string(record.dimension)}].push_back(
            record);
    }
    for (const auto& [key, group] : groups) {
        (void)key;
        std::size_t verdicts = 0;
        for (const auto& record : group) verdicts += record.outcomes.size();
        if (verdicts == 0) continue;  // every seed gapped; nothing to aggregate
        const Dimension dim = group.front().dimension;
        const bool target_side = dim == Dimension::neighbor_erase || dim == Dimension::evasion ||
                                 dim == Dimension::leakage_target;
        rows.push_back(target_side ? target_accuracy(group) : preserve_accuracy(group));
    }
    return rows;
}

RunOutcome cmd_run(const RunConfig& config, const std::string& dimension) {
    if (!is_known_dimension(dimension)) {
        throw ConfigError("unknown dimension '" + dimension + "' (expected one of: " +
                          dimension_list() + ")");
    }

    const AttributeVocabulary vocab;
    auto tree = std::make_shared<const ConceptTree>(build_catalog(default_superclass_table(), vocab));

    // Backend + adapter.
    std::shared_ptr<GeneratorBackend> backend;
    std::shared_ptr<CetAdapter> adapter;
    if (config.backend == "mock") {
        auto stack = std::make_shared<MockStack>(tree, config.mock, vocab);
        backend = stack;
        adapter = stack;
    } else {
        const auto endpoint = adapter_endpoint_from_env();
        if (!endpoint) {
            throw ConfigError(std::string("backend \"http\" requires ") + kAdapterEndpointVar +
                              " to be set");
        }
        backend = std::make_shared<HttpGeneratorBackend>(*endpoint);
        adapter = std::make_shared<HttpCetAdapter>(*endpoint);
    }
    ModelGateway gateway(backend, adapter);

    // Verifiers.
    VerifierBank bank;
    for (const VerifierSpec& spec : config.verifiers) {
        if (config.backend == "mock") {
            bank.register_backend(std::make_shared<OracleVerifier>(tree, vocab, spec.id));
        } else {
            const auto endpoint = verifier_endpoint_from_env();
            if (!endpoint) {
                throw ConfigError(std::string("backend \"http\" requires ") + kVerifierEndpointVar +
                                  " to be set");
            }
            bank.register_backend(std::make_shared<HttpVerifierBackend>(*endpoint, spec.id));
        }
    }

    EvalContext ctx;
    ctx.tree = tree;
    ctx.vocab = vocab;
    ctx.gateway = &gateway;
    ctx.bank = &bank;
    ctx.seeds = config.seeds;
    ctx.verifiers = config.verifiers;
    ctx.edit_bin_edges = config.edit_bin_edges;
    ctx.similarity_bin_width = config.similarity_bin_width;
    ctx.embedder_id = config.embedder_id;
    ctx.preserve_limit = config.preserve_limit;
    ctx.parallelism = config.parallelism;

    const GeneratorHandle base = gateway.register_base(config.base_model);

    RunPayload payload;
    auto note_model = [&payload](const GeneratorHandle& handle, const std::string& label) {
        if (payload.model_labels.count(handle.model_id) == 0) {
            payload.models.push_back(handle);
            payload.model_labels[handle.model_id] = label;
        }
    };

    if (dimension == "neighbors" || dimension == "leakage") {
        const ConceptNode& target_node = tree->find_by_name(config.target);
        EditRequest edit{config.cet, "", erase_names(*tree, target_node.id),
                         EditMode::single_call};
        const GeneratorHandle edited = gateway.apply_erasure(base, edit);
        note_model(base, "unedited");
        note_model(edited, config.cet + " (full erase set)");

        DimensionResult result =
            dimension == "neighbors"
                ? run_neighbor_dimension(ctx, config.target, {base.model_id, edited.model_id})
                : run_leakage_dimension(ctx, config.target, {base.model_id, edited.model_id});
        payload.records = std::move(result.records);
        payload.gaps = std::move(result.gaps);

        if (dimension == "leakage") {
            std::vector<std::string> partner_names;
            for (const auto& id : leakage_partners(*tree, target_node.id)) {
                partner_names.push_back(tree->node(id).name);
            }
            payload.leakage_pairing[config.target] = std::move(partner_names);
        }
    } else if (dimension == "evasion") {
        const ConceptNode& target_node = tree->find_by_name(config.target);
        const GeneratorHandle bare = gateway.apply_erasure(
            base, EditRequest{config.cet, "", {config.target}, EditMode::single_call});
        const GeneratorHandle full = gateway.apply_erasure(
            base,
            EditRequest{config.cet, "", erase_names(*tree, target_node.id), EditMode::single_call});
        note_model(base, "unedited");
        note_model(bare, config.cet + " (bare token only)");
        note_model(full, config.cet + " (full erase set)");

        DimensionResult result = run_evasion_dimension(
            ctx, config.target, {base.model_id, bare.model_id, full.model_id});
        payload.records = std::move(result.records);
        payload.gaps = std::move(result.gaps);
    } else if (dimension == "schedule") {
        ScheduleResult sched =
            run_schedule_comparison(ctx, config.cet, base, config.target, config.max_k);
        for (std::size_t i = 0; i < sched.ks.size(); ++i) {
            note_model(gateway.handle(sched.progressive_model_ids[i]),
                       "progressive (k=" + std::to_string(sched.ks[i]) + ")");
            note_model(gateway.handle(sched.all_at_once_model_ids[i]),
                       "all-at-once (k=" + std::to_string(sched.ks[i]) + ")");
        }
        payload.analysis = json{{"ks", sched.ks},
                                {"progressive", sched.progressive},
                                {"all_at_once", sched.all_at_once},
                                {"progressive_model_ids", sched.progressive_model_ids},
                                {"all_at_once_model_ids", sched.all_at_once_model_ids}};
        payload.records = std::move(sched.records);
        payload.gaps = std::move(sched.gaps);
    } else {  // attention
        const ConceptNode& target_node = tree->find_by_name(config.target);
        const std::vector<std::string> names = erase_names(*tree, target_node.id);

        // Base plus four partial erasures spanning the erase set, so the
        // correlation has a spread of accuracies to work with.
        std::vector<std::size_t> folds;
        for (double f : {0.25, 0.5, 0.75, 1.0}) {
            const auto k = static_cast<std::size_t>(std::llround(f * static_cast<double>(names.size())));
            folds.push_back(std::max<std::size_t>(std::size_t{1}, k));
        }
        folds.erase(std::unique(folds.begin(), folds.end()), folds.end());

        note_model(base, "unedited");
        std::vector<std::string> model_ids{base.model_id};
        for (std::size_t k : folds) {
            const std::vector<std::string> prefix(names.begin(),
                                                  names.begin() + static_cast<std::ptrdiff_t>(k));
            const GeneratorHandle handle = gateway.apply_erasure(
                base, EditRequest{config.cet, "", prefix, EditMode::single_call});
            note_model(handle, config.cet + " (k=" + std::to_string(k) + ")");
            model_ids.push_back(handle.model_id);
        }

        AttentionAnalysis analysis = run_attention_analysis(ctx, config.target, model_ids);
        json points = json::array();
        for (const auto& point : analysis.points) {
            points.push_back(json{{"model_id", point.model_id},
                                  {"target_accuracy", point.target_accuracy},
                                  {"mean_spread", point.mean_spread}});
        }
        payload.analysis = json{{"points", points},
                                {"r", analysis.correlation.r ? json(*analysis.correlation.r)
                                                             : json(nullptr)},
                                {"n", analysis.correlation.n}};
        payload.records = std::move(analysis.records);
        payload.gaps = std::move(analysis.gaps);
    }

    // Persist.
    RunOutcome outcome;
    outcome.run_id = run_id_for(config, dimension);
    const fs::path run_dir = fs::path(config.out_dir) / outcome.run_id;
    fs::create_directories(run_dir);
    outcome.run_dir = run_dir.string();
    outcome.gap_count = payload.gaps.size();

    write_text_file((run_dir / "records.jsonl").string(), eval_records_to_jsonl(payload.records));
    write_text_file((run_dir / "summary.csv").string(),
                    render_summary_csv(summary_rows_for(payload.records)));
    if (!payload.gaps.empty()) {
        write_text_file((run_dir / "gaps.jsonl").string(), gaps_to_jsonl(payload.gaps));
    }

    RunManifest manifest;
    manifest.run_id = outcome.run_id;
    manifest.dimension = dimension;
    manifest.created_at = now_iso8601_utc();
    manifest.tree_digest = catalog_digest(*tree);
    manifest.corpus_digest = corpus_digest(build_corpus(*tree, vocab));
    manifest.generator_version = kGeneratorVersion;
    manifest.config_json = normalized_config_json(config);
    manifest.analysis_json = payload.analysis.dump(2);
    manifest.models = payload.models;
    manifest.model_labels = payload.model_labels;
    for (const VerifierSpec& spec : config.verifiers) {
        manifest.verifier_versions.emplace_back(spec.id, bank.backend(spec.id).version());
    }
    manifest.leakage_pairing = payload.leakage_pairing;
    manifest.notes = {
        "std is the sample standard deviation (n-1) across per-seed accuracies, in percent",
        "attention spread is reconstructed as normalized spatial entropy of the token's "
        "attention grid (the source analysis never defines its formula)",
        "indeterminate verdicts and generation gaps are excluded from every denominator",
    };
    manifest.gap_count = payload.gaps.size();
    write_text_file((run_dir / "manifest.json").string(), manifest_to_json(manifest));

    return outcome;
}

std::string resolve_run_dir(const std::string& run_ref, const std::string& runs_root) {
    if (fs::exists(fs::path(run_ref) / "manifest.json")) return run_ref;
    const fs::path nested = fs::path(runs_root) / run_ref;
    if (fs::exists(nested / "manifest.json")) return nested.string();
    throw LookupError("no run found at '" + run_ref + "' or '" + nested.string() + "'");
}

std::vector<std::string> cmd_report(const std::string& run_dir, const std::string& format) {
    if (format != "csv" && format != "md" && format != "plots") {
        throw ConfigError("unknown report format '" + format + "' (expected csv, md, or plots)");
    }

    const RunManifest manifest =
        manifest_from_json(read_text_file((fs::path(run_dir) / "manifest.json").string()));
    const std::vector<EvalRecord> records =
        eval_records_from_jsonl(read_text_file((fs::path(run_dir) / "records.jsonl").string()));
    const std::vector<MetricSummary> summaries = summary_rows_for(records);

    std::vector<std::string> model_order;
    for (const auto& handle : manifest.models) model_order.push_back(handle.model_id);
    std::vector<std::string> verifier_order;
    for (const auto& [id, version] : manifest.verifier_versions) {
        (void)version;
        verifier_order.push_back(id);
    }
    const json analysis = json::parse(manifest.analysis_json);

    std::vector<std::string> written;
    auto emit = [&](const std::string& name, const std::string& content) {
        const std::string path = (fs::path(run_dir) / name).string();
        write_text_file(path, content);
        written.push_back(path);
    };

    if (format == "csv" || format == "md") {
        const std::string ext = "." + format;
        auto render = [&](const TextTable& table) {
            return format == "csv" ? table_to_csv(table) : table_to_md(table);
        };

        if (manifest.dimension == "neighbors" || manifest.dimension == "evasion" ||
            manifest.dimension == "leakage") {
            emit("table_" + manifest.dimension + ext,
                 render(build_accuracy_table(summaries, manifest.dimension, model_order,
                                             manifest.model_labels, verifier_order)));
            if (manifest.dimension == "leakage") {
                emit("table_leakage_families" + ext,
                     render(build_family_breakdown_table(summaries, model_order,
                                                         manifest.model_labels, verifier_order)));
            }
        } else if (manifest.dimension == "schedule") {
            emit("table_schedule" + ext,
                 render(build_schedule_table(analysis.at("ks").get<std::vector<int>>(),
                                             analysis.at("progressive").get<std::vector<double>>(),
                                             analysis.at("all_at_once").get<std::vector<double>>())));
        } else {  // attention
            TextTable table;
            table.header = {"model", "target accuracy (%)", "mean attention spread"};
            for (const auto& point : analysis.at("points")) {
                const std::string model_id = point.at("model_id").get<std::string>();
                const auto label_it = manifest.model_labels.find(model_id);
                table.rows.push_back(
                    {label_it == manifest.model_labels.end() ? model_id : label_it->second,
                     fmt_fixed(point.at("target_accuracy").get<double>(), 2),
                     fmt_fixed(point.at("mean_spread").get<double>(), 4)});
            }
            table.rows.push_back({"Pearson r across models",
                                  analysis.at("r").is_null()
                                      ? std::string("undefined")
                                      : fmt_fixed(analysis.at("r").get<double>(), 4),
                                  ""});
            emit("table_attention" + ext, render(table));
        }
        if (format == "csv") {
            emit("summary.csv", render_summary_csv(summaries));
        }
        return written;
    }

    // plots
    fs::create_directories(fs::path(run_dir) / "plots");
    if (manifest.dimension == "neighbors") {
        emit("plots/neighbor_erase.svg",
             render_neighbor_plot(summaries, Dimension::neighbor_erase, "edit", model_order,
                                  manifest.model_labels, verifier_order));
        bool any_edit = false;
        bool any_cos = false;
        for (const auto& row : summaries) {
            if (row.dimension != Dimension::neighbor_preserve) continue;
            if (row.group.rfind("edit[", 0) == 0) any_edit = true;
            if (row.group.rfind("cos[", 0) == 0) any_cos = true;
        }
        if (any_edit) {
            emit("plots/neighbor_preserve_edit.svg",
                 render_neighbor_plot(summaries, Dimension::neighbor_preserve, "edit", model_order,
                                      manifest.model_labels, verifier_order));
        }
        if (any_cos) {
            emit("plots/neighbor_preserve_similarity.svg",
                 render_neighbor_plot(summaries, Dimension::neighbor_preserve, "cos", model_order,
                                      manifest.model_labels, verifier_order));
        }
    } else if (manifest.dimension == "schedule") {
        emit("plots/schedule.svg",
             render_schedule_plot(analysis.at("ks").get<std::vector<int>>(),
                                  analysis.at("progressive").get<std::vector<double>>(),
                                  analysis.at("all_at_once").get<std::vector<double>>()));
    } else if (manifest.dimension == "attention") {
        std::vector<ScatterPoint> points;
        for (const auto& point : analysis.at("points")) {
            points.push_back(ScatterPoint{point.at("model_id").get<std::string>(),
                                          point.at("target_accuracy").get<double>(),
                                          point.at("mean_spread").get<double>()});
        }
        std::optional<double> r;
        if (!analysis.at("r").is_null()) r = analysis.at("r").get<double>();
        emit("plots/attention_scatter.svg",
             render_scatter_plot(points, manifest.model_labels, r));
    }
    // evasion and leakage are table-only dimensions; no figures defined.
    return written;
}

}  // namespace see
