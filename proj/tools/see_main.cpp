// CLI for the side-effect evaluation harness.
//
// Exit codes: 0 success, 1 configuration/usage error, 2 partial backend
// failure (results still written; see gaps.jsonl), 3 internal invariant
// violation.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "see/commands.hpp"
#include "see/util.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Side-effect evaluation harness for concept erasure in text-to-image models"};
    app.require_subcommand(1);

    std::string corpus_out = "corpus";
    CLI::App* gen = app.add_subcommand("gen-corpus", "Generate the compositional prompt corpus");
    gen->add_option("--out", corpus_out, "Output directory")->capture_default_str();

    std::string config_path;
    std::string dimension;
    CLI::App* run = app.add_subcommand("run", "Execute one evaluation dimension end-to-end");
    run->add_option("--config", config_path, "Run configuration JSON file")->required();
    run->add_option("--dimension", dimension,
                    "One of: neighbors, evasion, leakage, schedule, attention")
        ->required();

    std::string run_ref;
    std::string format = "csv";
    std::string runs_root = "runs";
    CLI::App* report = app.add_subcommand("report", "Render tables or plots from a stored run");
    report->add_option("--run", run_ref, "Run id or run directory")->required();
    report->add_option("--format", format, "csv, md, or plots")->capture_default_str();
    report->add_option("--runs-root", runs_root, "Directory searched when --run is a bare id")
        ->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            const see::CorpusOutcome outcome = see::cmd_gen_corpus(corpus_out);
            std::cout << "wrote " << outcome.records << " prompt records to "
                      << outcome.corpus_path << "\n";
            std::cout << "wrote " << outcome.manifest_path << "\n";
        } else if (run->parsed()) {
            const see::RunConfig config = see::load_run_config(config_path);
            const see::RunOutcome outcome = see::cmd_run(config, dimension);
            std::cout << "run " << outcome.run_id << " written to " << outcome.run_dir << "\n";
            if (outcome.gap_count > 0) {
                std::cerr << outcome.gap_count
                          << " generation gap(s); affected prompt/seed pairs are listed in "
                          << outcome.run_dir << "/gaps.jsonl and excluded from all denominators\n";
                return 2;
            }
        } else {
            const std::string run_dir = see::resolve_run_dir(run_ref, runs_root);
            const std::vector<std::string> files = see::cmd_report(run_dir, format);
            if (files.empty()) {
                std::cout << "no " << format << " artifacts are defined for this run's dimension\n";
            }
            for (const std::string& file : files) std::cout << file << "\n";
        }
        return 0;
    } catch (const see::ConfigError& error) {
        std::cerr << "config error: " << error.what() << "\n";
        return 1;
    } catch (const see::LookupError& error) {
        std::cerr << "lookup error: " << error.what() << "\n";
        return 1;
    } catch (const see::ContractError& error) {
        std::cerr << "error: " << error.what() << "\n";
        return 1;
    } catch (const see::BackendError& error) {
        std::cerr << "backend error: " << error.what() << "\n";
        return 2;
    } catch (const see::InvariantError& error) {
        std::cerr << "invariant violated: " << error.what() << "\n";
        return 3;
    }
}
