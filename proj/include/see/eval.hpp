#pragma once

// Evaluation engine: drives the three side-effect dimensions (neighbors,
// evasion, leakage) plus the erasure-scheduling and attention analyses over
// any registered generator/verifier pair, and aggregates verdicts into
// mean/std summaries.  Everything is deterministic for a fixed configuration:
// work items are enumerated in canonical order and written to indexed slots,
// so the parallelism degree never changes a byte of output.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "see/attention.hpp"
#include "see/catalog.hpp"
#include "see/gateway.hpp"
#include "see/verifier.hpp"

namespace see {

enum class Dimension {
    neighbor_erase,     // probes inside erase_set(e)
    neighbor_preserve,  // probes inside preserve_set(e)
    evasion,            // superclass presence on descendant prompts
    leakage_target,     // "<attr> <e>" presence on leakage prompts
    leakage_preserve,   // "<attr> <p>" presence on leakage prompts
};

std::string to_string(Dimension dimension);
Dimension dimension_from_string(const std::string& text);

/// Which verifier to consult and how it decides presence.
struct VerifierSpec {
    std::string id;
    ProbeMode mode = ProbeMode::vqa;

    bool operator==(const VerifierSpec&) const = default;
};

/// One probed concept on one model under one verifier: outcomes per seed.
/// `seeds`/`outcomes` are parallel arrays; generation gaps simply omit the
/// seed rather than inventing a verdict.
struct EvalRecord {
    Dimension dimension = Dimension::neighbor_erase;
    std::string model_id;
    std::string target;      // erase target e, as a concept phrase
    std::string concept_id;  // probed concept's tree node id
    std::string probe;       // probed concept phrase
    std::string group;       // distance bin, superclass, or attribute family
    std::optional<int> edit_distance;   // same-family neighbor probes
    std::optional<double> similarity;   // cross-family neighbor probes
    std::string verifier_id;
    std::vector<std::uint32_t> seeds;
    std::vector<Outcome> outcomes;

    bool operator==(const EvalRecord&) const = default;
};

/// One row of the Tables-2/3/4-shaped outputs: accuracy mean/std in percent.
/// The mean is over per-seed accuracies; std is the sample standard deviation
/// across seeds; n counts the (prompt, seed) verdicts that entered.
struct MetricSummary {
    std::string model_id;
    std::string verifier_id;
    Dimension dimension = Dimension::neighbor_erase;
    std::string group;
    double mean = 0.0;     // percent
    double std_dev = 0.0;  // percent
    std::size_t n = 0;

    bool operator==(const MetricSummary&) const = default;
};

struct DimensionResult {
    std::vector<EvalRecord> records;
    std::vector<GenerationGap> gaps;
};

/// Shared run state handed to every dimension runner. Pointers are non-owning
/// and must outlive the call.
struct EvalContext {
    std::shared_ptr<const ConceptTree> tree;
    AttributeVocabulary vocab;
    ModelGateway* gateway = nullptr;
    VerifierBank* bank = nullptr;
    std::vector<std::uint32_t> seeds = {0, 1, 2, 3};
    std::vector<VerifierSpec> verifiers;
    std::vector<double> edit_bin_edges = {0, 1, 2, 3, 4};
    double similarity_bin_width = 0.05;
    std::string embedder_id = "hash-64";
    // 0 = the full preserve set; otherwise the first N prompt-bearing
    // preserve concepts in canonical order (recorded in the manifest).
    std::size_t preserve_limit = 0;
    int parallelism = 1;
};

// --- aggregation ---------------------------------------------------------

// Groups records by (model, verifier, dimension, group) and summarizes each
// group. Output order is sorted by those keys; input order never matters.
// Groups whose verdicts are all indeterminate are dropped (their counts
// remain visible in the verifier bank's tally).
std::vector<MetricSummary> summarize(const std::vector<EvalRecord>& records);

// Overall accuracy across erase-side records (dimension neighbor_erase,
// evasion, or leakage_target; lower is better post-erasure). All records
// must share model, verifier, and dimension; empty input is rejected.
MetricSummary target_accuracy(const std::vector<EvalRecord>& records);

// Overall accuracy across preserve-side records (dimension neighbor_preserve
// or leakage_preserve; for neighbor_preserve higher is better).
MetricSummary preserve_accuracy(const std::vector<EvalRecord>& records);

// --- probe construction ----------------------------------------------------

// Presence probe for a concept phrase. classify mode uses the phrase plus its
// tree siblings as the label set (probe first): superclasses compete with the
// 11 superclass labels, objects with their superclass's other objects, and
// variants with their object family plus the bare object.
Probe make_concept_probe(const ConceptTree& tree, const AttributeVocabulary& vocab,
                         const std::string& concept_phrase, ProbeMode mode);

// --- dimension runners -------------------------------------------------

// Erase-set and preserve-set accuracy stratified by distance to e: edit
// distance bins for same-family probes, cosine-similarity bins (hash
// embedder) for cross-family probes. e must be an object or variant.
DimensionResult run_neighbor_dimension(const EvalContext& ctx, const std::string& target_phrase,
                                       const std::vector<std::string>& model_ids);

// Superclass presence measured on every descendant prompt of superclass e:
// classification over the 11 superclass labels or the superclass yes/no
// question, per verifier mode.
DimensionResult run_evasion_dimension(const EvalContext& ctx, const std::string& superclass_name,
                                      const std::vector<std::string>& model_ids);

// Attribute-leakage protocol for object e: for each of the 9 attributes and
// 3 partner objects, generates the two-object leakage prompt and probes both
// the attributed target phrase and the attributed partner phrase. Groups are
// attribute families (size/color/material).
DimensionResult run_leakage_dimension(const EvalContext& ctx, const std::string& erase_object,
                                      const std::vector<std::string>& model_ids);

// The 3 preserve-side partner objects paired with `object_id` for leakage:
// deterministically drawn from the next three superclasses in canonical
// order, index keyed by the object's name digest.
std::vector<std::string> leakage_partners(const ConceptTree& tree, const std::string& object_id);

// --- scheduling comparison -----------------------------------------------

struct ScheduleResult {
    std::vector<int> ks;                  // 1..K
    std::vector<double> progressive;      // target accuracy %, fold after k steps
    std::vector<double> all_at_once;      // target accuracy %, single call with k targets
    std::vector<std::string> progressive_model_ids;
    std::vector<std::string> all_at_once_model_ids;
    std::vector<EvalRecord> records;
    std::vector<GenerationGap> gaps;
};

// For k = 1..K over erase_set(e) in canonical order, compares the
// sequential-fold handle after k steps against a fresh single-call edit with
// the same first k targets; both arms are measured on those k concepts'
// prompts with the first configured verifier. max_k = 0 runs the full set.
// Requires |erase_set(e)| > 1.
ScheduleResult run_schedule_comparison(const EvalContext& ctx, const std::string& cet_name,
                                       const GeneratorHandle& base,
                                       const std::string& target_phrase, std::size_t max_k = 0);

// --- attention analysis ----------------------------------------------------

struct AttentionAnalysis {
    std::vector<ScatterPoint> points;  // one per model: (target accuracy, mean spread)
    CorrelationResult correlation;
    std::vector<EvalRecord> records;
    std::vector<GenerationGap> gaps;
};

// Generates erase_set(e) prompts with attention maps on each model, measures
// target accuracy (first configured verifier) and mean attention spread of
// the probed concept, and correlates the two across models (needs >= 3).
AttentionAnalysis run_attention_analysis(const EvalContext& ctx, const std::string& target_phrase,
                                         const std::vector<std::string>& model_ids);

// --- persistence ---------------------------------------------------------

// JSON lines, stable-sorted by (dimension, model, verifier, concept, probe);
// byte-identical output for identical record sets regardless of input order.
std::string eval_records_to_jsonl(std::vector<EvalRecord> records);
std::vector<EvalRecord> eval_records_from_jsonl(const std::string& text);

}  // namespace see
