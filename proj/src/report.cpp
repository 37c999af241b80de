#include "see/report.hpp"

#include <algorithm>
#include <cstdlib>
#include <tuple>

#include <json.hpp>

#include "see/protocol.hpp"
#include "see/svg_plot.hpp"
#include "see/util.hpp"

namespace see {
namespace {

using nlohmann::json;

json handle_to_json(const GeneratorHandle& handle) {
    json edits = json::array();
    for (const auto& edit : handle.provenance) {
        edits.push_back(json::parse(edit_request_to_json(edit)));
    }
    return json{{"model_id", handle.model_id},
                {"capabilities", json::parse(capabilities_to_json(handle.capabilities))},
                {"provenance", edits}};
}

GeneratorHandle handle_from_json(const json& j) {
    GeneratorHandle handle;
    handle.model_id = j.at("model_id").get<std::string>();
    handle.capabilities = capabilities_from_json(j.at("capabilities").dump());
    for (const auto& edit : j.at("provenance")) {
        handle.provenance.push_back(edit_request_from_json(edit.dump()));
    }
    return handle;
}

std::string cell_mean_std(const MetricSummary& row) {
    return fmt_fixed(row.mean, 2) + " ± " + fmt_fixed(row.std_dev, 2);
}

// Human name for each metric dimension as a table row qualifier.
std::string metric_label(Dimension dim) {
    switch (dim) {
        case Dimension::neighbor_erase: return "erase set";
        case Dimension::neighbor_preserve: return "preserve set";
        case Dimension::evasion: return "superclass evasion";
        case Dimension::leakage_target: return "target phrase";
        case Dimension::leakage_preserve: return "preserve phrase";
    }
    return "?";
}

// Which metric dimensions a run dimension reports, in table row order.
std::vector<Dimension> metrics_for_dimension(const std::string& dimension) {
    if (dimension == "neighbors") {
        return {Dimension::neighbor_erase, Dimension::neighbor_preserve};
    }
    if (dimension == "evasion") {
        return {Dimension::evasion};
    }
    if (dimension == "leakage") {
        return {Dimension::leakage_target, Dimension::leakage_preserve};
    }
    throw ContractError("no accuracy table layout for dimension '" + dimension + "'");
}

std::string pretty_label(const std::map<std::string, std::string>& labels,
                         const std::string& model_id) {
    auto it = labels.find(model_id);
    return it == labels.end() ? model_id : it->second;
}

}  // namespace

std::string manifest_to_json(const RunManifest& manifest) {
    json models = json::array();
    for (const auto& handle : manifest.models) models.push_back(handle_to_json(handle));

    json verifiers = json::array();
    for (const auto& [id, version] : manifest.verifier_versions) {
        verifiers.push_back(json{{"id", id}, {"version", version}});
    }

    json pairing = json::object();
    for (const auto& [target, partners] : manifest.leakage_pairing) pairing[target] = partners;

    json j{{"run_id", manifest.run_id},
           {"dimension", manifest.dimension},
           {"created_at", manifest.created_at},
           {"tree_digest", manifest.tree_digest},
           {"corpus_digest", manifest.corpus_digest},
           {"generator_version", manifest.generator_version},
           {"config", json::parse(manifest.config_json.empty() ? "{}" : manifest.config_json)},
           {"analysis", json::parse(manifest.analysis_json.empty() ? "{}" : manifest.analysis_json)},
           {"models", models},
           {"model_labels", manifest.model_labels},
           {"verifiers", verifiers},
           {"leakage_pairing", pairing},
           {"notes", manifest.notes},
           {"gap_count", manifest.gap_count}};
    return j.dump(2) + "\n";
}

RunManifest manifest_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& ex) {
        throw ConfigError(std::string("manifest is not valid JSON: ") + ex.what());
    }
    try {
        RunManifest m;
        m.run_id = j.at("run_id").get<std::string>();
        m.dimension = j.at("dimension").get<std::string>();
        m.created_at = j.at("created_at").get<std::string>();
        m.tree_digest = j.at("tree_digest").get<std::string>();
        m.corpus_digest = j.at("corpus_digest").get<std::string>();
        m.generator_version = j.at("generator_version").get<std::string>();
        m.config_json = j.at("config").dump(2);
        m.analysis_json = j.at("analysis").dump(2);
        for (const auto& h : j.at("models")) m.models.push_back(handle_from_json(h));
        for (auto it = j.at("model_labels").begin(); it != j.at("model_labels").end(); ++it) {
            m.model_labels[it.key()] = it.value().get<std::string>();
        }
        for (const auto& v : j.at("verifiers")) {
            m.verifier_versions.emplace_back(v.at("id").get<std::string>(),
                                             v.at("version").get<std::string>());
        }
        for (auto it = j.at("leakage_pairing").begin(); it != j.at("leakage_pairing").end(); ++it) {
            m.leakage_pairing[it.key()] = it.value().get<std::vector<std::string>>();
        }
        m.notes = j.at("notes").get<std::vector<std::string>>();
        m.gap_count = j.at("gap_count").get<std::size_t>();
        return m;
    } catch (const json::exception& ex) {
        throw ConfigError(std::string("manifest missing or malformed field: ") + ex.what());
    }
}

std::string csv_escape(const std::string& field) {
    const bool needs_quotes = field.find_first_of(",\"\n") != std::string::npos;
    if (!needs_quotes) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}

std::string render_summary_csv(std::vector<MetricSummary> rows) {
    std::sort(rows.begin(), rows.end(), [](const MetricSummary& a, const MetricSummary& b) {
        return std::tie(a.model_id, a.verifier_id, a.dimension, a.group) <
               std::tie(b.model_id, b.verifier_id, b.dimension, b.group);
    });
    std::string out = "model_id,verifier_id,dimension,group,mean,std,n\n";
    for (const auto& row : rows) {
        out += csv_escape(row.model_id) + "," + csv_escape(row.verifier_id) + "," +
               csv_escape(to_string(row.dimension)) + "," + csv_escape(row.group) + "," +
               fmt_fixed(row.mean, 4) + "," + fmt_fixed(row.std_dev, 4) + "," +
               std::to_string(row.n) + "\n";
    }
    return out;
}

std::string table_to_csv(const TextTable& table) {
    std::string out;
    std::vector<std::string> cells;
    auto emit_row = [&](const std::vector<std::string>& row) {
        std::string line;
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) line += ",";
            line += csv_escape(row[i]);
        }
        out += line + "\n";
    };
    emit_row(table.header);
    for (const auto& row : table.rows) emit_row(row);
    return out;
}

std::string table_to_md(const TextTable& table) {
    auto emit_row = [](const std::vector<std::string>& row) {
        std::string line = "|";
        for (const auto& cell : row) {
            std::string safe = cell;
            std::string::size_type pos = 0;
            while ((pos = safe.find('|', pos)) != std::string::npos) {
                safe.replace(pos, 1, "\\|");
                pos += 2;
            }
            line += " " + safe + " |";
        }
        return line + "\n";
    };
    std::string out = emit_row(table.header);
    std::string rule = "|";
    for (std::size_t i = 0; i < table.header.size(); ++i) rule += " --- |";
    out += rule + "\n";
    for (const auto& row : table.rows) out += emit_row(row);
    return out;
}

TextTable build_accuracy_table(const std::vector<MetricSummary>& summaries,
                               const std::string& dimension,
                               const std::vector<std::string>& model_order,
                               const std::map<std::string, std::string>& model_labels,
                               const std::vector<std::string>& verifier_order) {
    const auto metrics = metrics_for_dimension(dimension);

    // (model, metric, verifier) -> formatted cell
    std::map<std::tuple<std::string, std::string, std::string>, std::string> cells;
    for (const auto& row : summaries) {
        if (row.group != "overall") continue;
        cells[{row.model_id, to_string(row.dimension), row.verifier_id}] = cell_mean_std(row);
    }

    TextTable table;
    table.header = {"model", "metric"};
    for (const auto& v : verifier_order) table.header.push_back(v);

    for (const auto& model_id : model_order) {
        for (Dimension metric : metrics) {
            std::vector<std::string> row{pretty_label(model_labels, model_id),
                                         metric_label(metric)};
            bool any = false;
            for (const auto& v : verifier_order) {
                auto it = cells.find({model_id, to_string(metric), v});
                if (it == cells.end()) {
                    row.push_back("n/a");
                } else {
                    row.push_back(it->second);
                    any = true;
                }
            }
            if (any) table.rows.push_back(std::move(row));
        }
    }
    return table;
}

TextTable build_family_breakdown_table(const std::vector<MetricSummary>& summaries,
                                       const std::vector<std::string>& model_order,
                                       const std::map<std::string, std::string>& model_labels,
                                       const std::vector<std::string>& verifier_order) {
    static const std::vector<std::string> kFamilies = {"size", "color", "material"};
    const std::vector<Dimension> metrics = {Dimension::leakage_target, Dimension::leakage_preserve};

    std::map<std::tuple<std::string, std::string, std::string, std::string>, std::string> cells;
    for (const auto& row : summaries) {
        if (std::find(kFamilies.begin(), kFamilies.end(), row.group) == kFamilies.end()) continue;
        cells[{row.model_id, to_string(row.dimension), row.group, row.verifier_id}] =
            cell_mean_std(row);
    }

    TextTable table;
    table.header = {"model", "metric", "attribute family"};
    for (const auto& v : verifier_order) table.header.push_back(v);

    for (const auto& model_id : model_order) {
        for (Dimension metric : metrics) {
            for (const auto& family : kFamilies) {
                std::vector<std::string> row{pretty_label(model_labels, model_id),
                                             metric_label(metric), family};
                bool any = false;
                for (const auto& v : verifier_order) {
                    auto it = cells.find({model_id, to_string(metric), family, v});
                    if (it == cells.end()) {
                        row.push_back("n/a");
                    } else {
                        row.push_back(it->second);
                        any = true;
                    }
                }
                if (any) table.rows.push_back(std::move(row));
            }
        }
    }
    return table;
}

TextTable build_schedule_table(const std::vector<int>& ks, const std::vector<double>& progressive,
                               const std::vector<double>& all_at_once) {
    if (ks.size() != progressive.size() || ks.size() != all_at_once.size()) {
        throw ContractError("schedule table needs equal-length k/progressive/all-at-once arrays");
    }
    TextTable table;
    table.header = {"k", "progressive", "all-at-once"};
    for (std::size_t i = 0; i < ks.size(); ++i) {
        table.rows.push_back({std::to_string(ks[i]), fmt_fixed(progressive[i], 2),
                              fmt_fixed(all_at_once[i], 2)});
    }
    return table;
}

std::optional<double> bin_lower_edge(const std::string& group) {
    const auto open = group.find('[');
    const auto comma = group.find(',', open);
    if (open == std::string::npos || comma == std::string::npos) return std::nullopt;
    const std::string number = group.substr(open + 1, comma - open - 1);
    char* end = nullptr;
    const double value = std::strtod(number.c_str(), &end);
    if (end == number.c_str() || *end != '\0') return std::nullopt;
    return value;
}

std::string render_neighbor_plot(const std::vector<MetricSummary>& summaries, Dimension side,
                                 const std::string& bin_kind,
                                 const std::vector<std::string>& model_order,
                                 const std::map<std::string, std::string>& model_labels,
                                 const std::vector<std::string>& verifier_order) {
    std::vector<PlotSeries> series;
    for (const auto& model_id : model_order) {
        for (const auto& verifier : verifier_order) {
            PlotSeries s;
            s.label = pretty_label(model_labels, model_id) + " / " + verifier;
            std::vector<std::pair<double, double>> pts;
            for (const auto& row : summaries) {
                if (row.model_id != model_id || row.verifier_id != verifier ||
                    row.dimension != side) {
                    continue;
                }
                if (row.group.rfind(bin_kind + "[", 0) != 0) continue;
                const auto edge = bin_lower_edge(row.group);
                if (!edge) continue;
                pts.emplace_back(*edge, row.mean);
            }
            std::sort(pts.begin(), pts.end());
            if (pts.empty()) continue;
            s.points = std::move(pts);
            series.push_back(std::move(s));
        }
    }

    PlotOptions options;
    options.title = (side == Dimension::neighbor_erase ? std::string("Erase-set accuracy vs ")
                                                       : std::string("Preserve-set accuracy vs ")) +
                    (bin_kind == "edit" ? "edit distance" : "embedding similarity");
    options.x_label = bin_kind == "edit" ? "edit distance bin (lower edge)"
                                         : "cosine similarity bin (lower edge)";
    options.y_label = "accuracy (%)";
    options.y_min = 0.0;
    options.y_max = 105.0;
    return render_plot_svg(series, options);
}

std::string render_schedule_plot(const std::vector<int>& ks, const std::vector<double>& progressive,
                                 const std::vector<double>& all_at_once) {
    if (ks.size() != progressive.size() || ks.size() != all_at_once.size()) {
        throw ContractError("schedule plot needs equal-length k/progressive/all-at-once arrays");
    }
    PlotSeries prog{"progressive", {}, true, true};
    PlotSeries once{"all-at-once", {}, true, true};
    for (std::size_t i = 0; i < ks.size(); ++i) {
        prog.points.emplace_back(static_cast<double>(ks[i]), progressive[i]);
        once.points.emplace_back(static_cast<double>(ks[i]), all_at_once[i]);
    }
    PlotOptions options;
    options.title = "Erasure schedule: residual accuracy on the first k targets";
    options.x_label = "k (targets erased)";
    options.y_label = "accuracy (%)";
    options.y_min = 0.0;
    options.y_max = 105.0;
    return render_plot_svg({prog, once}, options);
}

std::string render_scatter_plot(const std::vector<ScatterPoint>& points,
                                const std::map<std::string, std::string>& model_labels,
                                const std::optional<double>& r) {
    std::vector<PlotSeries> series;
    for (const auto& point : points) {
        PlotSeries s;
        s.label = pretty_label(model_labels, point.model_id);
        s.draw_line = false;
        s.points.emplace_back(point.mean_spread, point.target_accuracy);
        series.push_back(std::move(s));
    }
    PlotOptions options;
    options.title = "Attention spread vs target accuracy" +
                    (r ? " (r = " + fmt_fixed(*r, 4) + ")" : std::string(" (r undefined)"));
    options.x_label = "mean attention spread";
    options.y_label = "target accuracy (%)";
    options.y_min = 0.0;
    options.y_max = 105.0;
    return render_plot_svg(series, options);
}

}  // namespace see
