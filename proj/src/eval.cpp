#include "see/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <set>
#include <thread>
#include <tuple>

#include <json.hpp>

#include "see/distance.hpp"
#include "see/prompts.hpp"
#include "see/util.hpp"

namespace see {

namespace {

using nlohmann::json;

// Runs fn(0..n-1) on up to `threads` workers. Each index owns its output
// slot, so any interleaving produces identical results; the first exception
// wins and is rethrown after all workers drain.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
    std::atomic<std::size_t> next{0};
    std::atomic<bool> bail{false};
    std::mutex error_mutex;
    std::exception_ptr first_error;
    auto worker = [&] {
        while (!bail.load()) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                bail.store(true);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

/// One probed concept on one prompt; expanded to (model x verifier) records.
struct ProbeTask {
    Dimension dimension = Dimension::neighbor_erase;
    std::string target;
    std::string concept_id;
    std::string prompt_id;
    std::string prompt;
    std::string probe_phrase;
    std::string group;
    std::optional<int> edit_distance;
    std::optional<double> similarity;
};

void require_context(const EvalContext& ctx) {
    if (!ctx.tree) throw ContractError("eval context has no concept tree");
    if (ctx.gateway == nullptr) throw ContractError("eval context has no model gateway");
    if (ctx.bank == nullptr) throw ContractError("eval context has no verifier bank");
    if (ctx.seeds.empty()) throw ContractError("eval context has no seeds");
    if (ctx.verifiers.empty()) throw ContractError("eval context has no verifiers");
    for (const VerifierSpec& spec : ctx.verifiers) {
        if (!ctx.bank->has(spec.id)) {
            throw LookupError("verifier '" + spec.id + "' is not registered");
        }
    }
}

std::string edit_bin_label(double lower, double upper) {
    return "edit[" + std::to_string(static_cast<int>(lower)) + "," +
           std::to_string(static_cast<int>(upper)) + ")";
}

std::string cosine_bin_label(double lower, double upper) {
    return "cos[" + fmt_fixed(lower, 2) + "," + fmt_fixed(upper, 2) + ")";
}

// Half-open bin edges covering cosine similarity's [-1, 1] range; the last
// edge overshoots by epsilon so an exact 1.0 lands inside rather than
// clamping.
std::vector<double> similarity_edges(double width) {
    if (width <= 0.0 || width > 2.0) {
        throw ConfigError("similarity bin width must be in (0, 2], got " + fmt_fixed(width, 4));
    }
    std::vector<double> edges;
    const int count = static_cast<int>(std::ceil(2.0 / width - 1e-9));
    edges.reserve(static_cast<std::size_t>(count) + 1);
    for (int i = 0; i < count; ++i) edges.push_back(-1.0 + width * i);
    edges.push_back(1.0 + 1e-9);
    return edges;
}

// Assigns one value through bin_concepts so task labels can never disagree
// with the binning the reports use.
std::string bin_label_for(double value, const std::vector<double>& edges, DistanceKind kind) {
    const auto bins = bin_concepts({{"probe", value}}, edges, kind);
    for (const DistanceBin& bin : bins) {
        if (!bin.members.empty()) {
            return kind == DistanceKind::edit_distance ? edit_bin_label(bin.lower, bin.upper)
                                                       : cosine_bin_label(bin.lower, bin.upper);
        }
    }
    throw InvariantError("bin_concepts dropped a value");  // unreachable by contract
}

std::string object_name_of(const ConceptTree& tree, const ConceptNode& node) {
    if (node.level == Level::variant) return tree.node(*node.parent_id).name;
    return node.name;
}

// Object-family ancestor id: the node itself for objects, the parent for
// variants, and "" for superclasses (which have no family).
std::string family_of(const ConceptNode& node) {
    if (node.level == Level::object) return node.id;
    if (node.level == Level::variant) return *node.parent_id;
    return "";
}

using ImageHook =
    std::function<void(const std::string& model_id, const ProbeTask& task, const ImageRecord&)>;

struct TaskRunOutput {
    std::vector<EvalRecord> records;
    std::vector<GenerationGap> gaps;
};

TaskRunOutput run_probe_tasks(const EvalContext& ctx, const std::vector<ProbeTask>& tasks,
                              const std::vector<std::string>& model_ids, bool want_attention,
                              const ImageHook& hook = nullptr) {
    require_context(ctx);
    const ConceptTree& tree = *ctx.tree;

    // Unique prompts in first-appearance order; leakage probes share images.
    std::vector<std::size_t> prompt_owner;  // index of the introducing task
    std::map<std::string, std::size_t> prompt_index;
    for (std::size_t t = 0; t < tasks.size(); ++t) {
        const ProbeTask& task = tasks[t];
        auto [it, inserted] = prompt_index.emplace(task.prompt_id, prompt_owner.size());
        if (inserted) {
            prompt_owner.push_back(t);
        } else if (tasks[prompt_owner[it->second]].prompt != task.prompt) {
            throw InvariantError("prompt id '" + task.prompt_id + "' maps to two prompt texts");
        }
    }

    // Probes depend only on (phrase, mode); build them once, up front.
    std::map<std::pair<std::string, ProbeMode>, Probe> probes;
    for (const ProbeTask& task : tasks) {
        for (const VerifierSpec& spec : ctx.verifiers) {
            const auto key = std::make_pair(task.probe_phrase, spec.mode);
            if (probes.count(key) == 0) {
                probes.emplace(key,
                               make_concept_probe(tree, ctx.vocab, task.probe_phrase, spec.mode));
            }
        }
    }

    TaskRunOutput out;
    const std::size_t n_seeds = ctx.seeds.size();
    for (const std::string& model_id : model_ids) {
        const GeneratorHandle& handle = ctx.gateway->handle(model_id);

        // Generation pass: one slot per (unique prompt, seed).
        const std::size_t n_images = prompt_owner.size() * n_seeds;
        std::vector<std::optional<ImageRecord>> images(n_images);
        std::vector<std::optional<GenerationGap>> gap_slots(n_images);
        parallel_for(n_images, ctx.parallelism, [&](std::size_t i) {
            const ProbeTask& task = tasks[prompt_owner[i / n_seeds]];
            GenerateRequest request;
            request.prompt_id = task.prompt_id;
            request.prompt = task.prompt;
            request.seed = ctx.seeds[i % n_seeds];
            request.want_attention = want_attention;
            try {
                images[i] = ctx.gateway->generate(handle, request);
            } catch (const BackendError& error) {
                GenerationGap gap;
                gap.prompt_id = task.prompt_id;
                gap.seed = request.seed;
                gap.reason = model_id + ": " + error.what();
                gap_slots[i] = gap;
            }
        });
        for (std::size_t i = 0; i < n_images; ++i) {
            if (gap_slots[i]) out.gaps.push_back(*gap_slots[i]);
            if (hook && images[i]) {
                hook(model_id, tasks[prompt_owner[i / n_seeds]], *images[i]);
            }
        }

        // Verification pass: one record per (task, verifier).
        const std::size_t n_records = tasks.size() * ctx.verifiers.size();
        std::vector<EvalRecord> records(n_records);
        parallel_for(n_records, ctx.parallelism, [&](std::size_t r) {
            const ProbeTask& task = tasks[r / ctx.verifiers.size()];
            const VerifierSpec& spec = ctx.verifiers[r % ctx.verifiers.size()];
            const Probe& probe = probes.at(std::make_pair(task.probe_phrase, spec.mode));
            EvalRecord record;
            record.dimension = task.dimension;
            record.model_id = model_id;
            record.target = task.target;
            record.concept_id = task.concept_id;
            record.probe = task.probe_phrase;
            record.group = task.group;
            record.edit_distance = task.edit_distance;
            record.similarity = task.similarity;
            record.verifier_id = spec.id;
            const std::size_t base = prompt_index.at(task.prompt_id) * n_seeds;
            for (std::size_t s = 0; s < n_seeds; ++s) {
                if (!images[base + s]) continue;  // generation gap
                const VerifierVerdict verdict =
                    ctx.bank->presence(*images[base + s], probe, spec.id);
                record.seeds.push_back(ctx.seeds[s]);
                record.outcomes.push_back(verdict.outcome);
            }
            records[r] = std::move(record);
        });
        out.records.insert(out.records.end(), std::make_move_iterator(records.begin()),
                           std::make_move_iterator(records.end()));
    }
    return out;
}

struct SeedTally {
    std::size_t present = 0;
    std::size_t valid = 0;
};

struct GroupStats {
    std::map<std::uint32_t, SeedTally> by_seed;
    std::size_t n = 0;
};

void tally_record(GroupStats& stats, const EvalRecord& record) {
    for (std::size_t i = 0; i < record.outcomes.size(); ++i) {
        if (record.outcomes[i] == Outcome::indeterminate) continue;  // excluded, tallied by bank
        SeedTally& tally = stats.by_seed[record.seeds[i]];
        tally.valid += 1;
        if (record.outcomes[i] == Outcome::present) tally.present += 1;
        stats.n += 1;
    }
}

// Per-seed accuracy over prompts, then mean and sample standard deviation
// across seeds, in percent.
MetricSummary finish_summary(const GroupStats& stats, std::string model_id,
                             std::string verifier_id, Dimension dimension, std::string group) {
    std::vector<double> per_seed;
    for (const auto& [seed, tally] : stats.by_seed) {
        (void)seed;
        if (tally.valid == 0) continue;
        per_seed.push_back(static_cast<double>(tally.present) / static_cast<double>(tally.valid));
    }
    if (per_seed.empty()) {
        throw ContractError("no valid verdicts to summarize for group '" + group + "'");
    }
    double mean = 0.0;
    for (double a : per_seed) mean += a;
    mean /= static_cast<double>(per_seed.size());
    double var = 0.0;
    if (per_seed.size() > 1) {
        for (double a : per_seed) var += (a - mean) * (a - mean);
        var /= static_cast<double>(per_seed.size() - 1);
    }
    MetricSummary summary;
    summary.model_id = std::move(model_id);
    summary.verifier_id = std::move(verifier_id);
    summary.dimension = dimension;
    summary.group = std::move(group);
    summary.mean = 100.0 * mean;
    summary.std_dev = 100.0 * std::sqrt(var);
    summary.n = stats.n;
    return summary;
}

MetricSummary overall_accuracy(const std::vector<EvalRecord>& records,
                               const std::set<Dimension>& allowed, const char* metric_name) {
    if (records.empty()) {
        throw ContractError(std::string(metric_name) + ": empty record set");
    }
    const EvalRecord& first = records.front();
    if (allowed.count(first.dimension) == 0) {
        throw ContractError(std::string(metric_name) + ": dimension " +
                            to_string(first.dimension) + " does not belong to this metric");
    }
    GroupStats stats;
    for (const EvalRecord& record : records) {
        if (record.model_id != first.model_id || record.verifier_id != first.verifier_id ||
            record.dimension != first.dimension) {
            throw ContractError(std::string(metric_name) +
                                ": records mix models, verifiers, or dimensions");
        }
        tally_record(stats, record);
    }
    return finish_summary(stats, first.model_id, first.verifier_id, first.dimension, "overall");
}

}  // namespace

std::string to_string(Dimension dimension) {
    switch (dimension) {
        case Dimension::neighbor_erase: return "neighbor_erase";
        case Dimension::neighbor_preserve: return "neighbor_preserve";
        case Dimension::evasion: return "evasion";
        case Dimension::leakage_target: return "leakage_target";
        case Dimension::leakage_preserve: return "leakage_preserve";
    }
    throw ContractError("unknown dimension value");
}

Dimension dimension_from_string(const std::string& text) {
    if (text == "neighbor_erase") return Dimension::neighbor_erase;
    if (text == "neighbor_preserve") return Dimension::neighbor_preserve;
    if (text == "evasion") return Dimension::evasion;
    if (text == "leakage_target") return Dimension::leakage_target;
    if (text == "leakage_preserve") return Dimension::leakage_preserve;
    throw ConfigError("unknown dimension '" + text + "'");
}

std::vector<MetricSummary> summarize(const std::vector<EvalRecord>& records) {
    using Key = std::tuple<std::string, std::string, std::string, std::string>;
    std::map<Key, GroupStats> groups;
    std::map<Key, Dimension> dimensions;
    for (const EvalRecord& record : records) {
        const Key key{record.model_id, record.verifier_id, to_string(record.dimension),
                      record.group};
        tally_record(groups[key], record);
        dimensions.emplace(key, record.dimension);
    }
    std::vector<MetricSummary> summaries;
    summaries.reserve(groups.size());
    for (const auto& [key, stats] : groups) {
        if (stats.n == 0) continue;  // all verdicts indeterminate or gapped
        summaries.push_back(finish_summary(stats, std::get<0>(key), std::get<1>(key),
                                           dimensions.at(key), std::get<3>(key)));
    }
    return summaries;
}

MetricSummary target_accuracy(const std::vector<EvalRecord>& records) {
    return overall_accuracy(
        records, {Dimension::neighbor_erase, Dimension::evasion, Dimension::leakage_target},
        "target_accuracy");
}

MetricSummary preserve_accuracy(const std::vector<EvalRecord>& records) {
    return overall_accuracy(records,
                            {Dimension::neighbor_preserve, Dimension::leakage_preserve},
                            "preserve_accuracy");
}

Probe make_concept_probe(const ConceptTree& tree, const AttributeVocabulary& vocab,
                         const std::string& concept_phrase, ProbeMode mode) {
    (void)vocab;
    const ConceptNode& node = tree.find_by_name(concept_phrase);
    if (mode == ProbeMode::vqa) return make_vqa_probe(node.name);

    std::vector<std::string> alternatives;
    switch (node.level) {
        case Level::superclass:
            for (const std::string& id : tree.superclass_ids()) {
                alternatives.push_back(tree.node(id).name);
            }
            break;
        case Level::object:
            for (const std::string& id : tree.children(*node.parent_id)) {
                alternatives.push_back(tree.node(id).name);
            }
            break;
        case Level::variant: {
            const ConceptNode& object = tree.node(*node.parent_id);
            alternatives.push_back(object.name);
            for (const std::string& id : tree.children(object.id)) {
                alternatives.push_back(tree.node(id).name);
            }
            break;
        }
    }
    return make_classify_probe(node.name, alternatives);
}

DimensionResult run_neighbor_dimension(const EvalContext& ctx, const std::string& target_phrase,
                                       const std::vector<std::string>& model_ids) {
    require_context(ctx);
    const ConceptTree& tree = *ctx.tree;
    const ConceptNode& e = tree.find_by_name(target_phrase);
    if (e.level == Level::superclass) {
        throw ContractError("neighbor dimension expects an object or variant target, '" +
                            target_phrase + "' is a superclass (use the evasion dimension)");
    }
    const std::string e_family = family_of(e);
    const auto embedder = make_embedder(ctx.embedder_id);
    const auto sim_edges = similarity_edges(ctx.similarity_bin_width);

    std::vector<ProbeTask> tasks;
    for (const std::string& id : erase_set(tree, e.id)) {
        const ConceptNode& c = tree.node(id);
        ProbeTask task;
        task.dimension = Dimension::neighbor_erase;
        task.target = e.name;
        task.concept_id = c.id;
        task.prompt_id = c.id;
        task.prompt = render_prompt_text(c.attributes, object_name_of(tree, c));
        task.probe_phrase = c.name;
        task.edit_distance = attribute_edit_distance(e.attributes, c.attributes);
        task.group = bin_label_for(static_cast<double>(*task.edit_distance), ctx.edit_bin_edges,
                                   DistanceKind::edit_distance);
        tasks.push_back(std::move(task));
    }
    std::size_t kept = 0;
    for (const std::string& id : preserve_set(tree, e.id)) {
        const ConceptNode& p = tree.node(id);
        if (p.level == Level::superclass) continue;  // not prompt-bearing
        if (ctx.preserve_limit > 0 && kept >= ctx.preserve_limit) break;
        ++kept;
        ProbeTask task;
        task.dimension = Dimension::neighbor_preserve;
        task.target = e.name;
        task.concept_id = p.id;
        task.prompt_id = p.id;
        task.prompt = render_prompt_text(p.attributes, object_name_of(tree, p));
        task.probe_phrase = p.name;
        if (family_of(p) == e_family) {
            task.edit_distance = attribute_edit_distance(e.attributes, p.attributes);
            task.group = bin_label_for(static_cast<double>(*task.edit_distance),
                                       ctx.edit_bin_edges, DistanceKind::edit_distance);
        } else {
            task.similarity = embedding_similarity(p.name, e.name, *embedder);
            task.group =
                bin_label_for(*task.similarity, sim_edges, DistanceKind::cosine_similarity);
        }
        tasks.push_back(std::move(task));
    }

    const TaskRunOutput out = run_probe_tasks(ctx, tasks, model_ids, false);
    return DimensionResult{out.records, out.gaps};
}

DimensionResult run_evasion_dimension(const EvalContext& ctx, const std::string& superclass_name,
                                      const std::vector<std::string>& model_ids) {
    require_context(ctx);
    const ConceptTree& tree = *ctx.tree;
    const ConceptNode& e = tree.find_by_name(superclass_name);
    if (e.level != Level::superclass) {
        throw ContractError("evasion dimension expects a superclass, '" + superclass_name +
                            "' is level " + to_string(e.level));
    }
    std::vector<ProbeTask> tasks;
    for (const ConceptNode& c : descendants(tree, e.id)) {
        ProbeTask task;
        task.dimension = Dimension::evasion;
        task.target = e.name;
        task.concept_id = c.id;
        task.prompt_id = c.id;
        task.prompt = render_prompt_text(c.attributes, object_name_of(tree, c));
        task.probe_phrase = e.name;  // probe the superclass, not the subclass
        task.group = e.name;
        tasks.push_back(std::move(task));
    }
    const TaskRunOutput out = run_probe_tasks(ctx, tasks, model_ids, false);
    return DimensionResult{out.records, out.gaps};
}

std::vector<std::string> leakage_partners(const ConceptTree& tree, const std::string& object_id) {
    const ConceptNode& e = tree.node(object_id);
    if (e.level != Level::object) {
        throw ContractError("leakage partners are defined for objects, '" + object_id +
                            "' is level " + to_string(e.level));
    }
    const auto& supers = tree.superclass_ids();
    std::size_t own = supers.size();
    for (std::size_t i = 0; i < supers.size(); ++i) {
        if (supers[i] == *e.parent_id) own = i;
    }
    if (own == supers.size()) throw InvariantError("object's superclass missing from tree");
    std::vector<std::string> partners;
    const std::uint64_t digest = fnv1a64(e.name);
    for (std::size_t k = 1; k <= 3; ++k) {
        const auto& objects = tree.children(supers[(own + k) % supers.size()]);
        partners.push_back(objects[digest % objects.size()]);
    }
    return partners;
}

DimensionResult run_leakage_dimension(const EvalContext& ctx, const std::string& erase_object,
                                      const std::vector<std::string>& model_ids) {
    require_context(ctx);
    const ConceptTree& tree = *ctx.tree;
    const ConceptNode& e = tree.find_by_name(erase_object);
    if (e.level != Level::object) {
        throw ContractError("leakage dimension expects a bare object target, '" + erase_object +
                            "' is level " + to_string(e.level));
    }
    const std::vector<std::string> partners = leakage_partners(tree, e.id);

    std::vector<ProbeTask> tasks;
    for (const char* slot : kSlotOrder) {
        for (const std::string& attribute : ctx.vocab.values(slot)) {
            for (const std::string& partner_id : partners) {
                const ConceptNode& p = tree.node(partner_id);
                const std::string prompt =
                    render_leakage_prompt(attribute, e.name, p.name, ctx.vocab);
                const std::string prompt_id = "leak/" + slugify(attribute) + "/" +
                                              slugify(e.name) + "--" + slugify(p.name);
                ProbeTask target_task;
                target_task.dimension = Dimension::leakage_target;
                target_task.target = e.name;
                target_task.concept_id = tree.find_by_name(attribute + " " + e.name).id;
                target_task.prompt_id = prompt_id;
                target_task.prompt = prompt;
                target_task.probe_phrase = attribute + " " + e.name;
                target_task.group = slot;
                tasks.push_back(std::move(target_task));

                ProbeTask preserve_task;
                preserve_task.dimension = Dimension::leakage_preserve;
                preserve_task.target = e.name;
                preserve_task.concept_id = tree.find_by_name(attribute + " " + p.name).id;
                preserve_task.prompt_id = prompt_id;  // same image, second probe
                preserve_task.prompt = prompt;
                preserve_task.probe_phrase = attribute + " " + p.name;
                preserve_task.group = slot;
                tasks.push_back(std::move(preserve_task));
            }
        }
    }
    const TaskRunOutput out = run_probe_tasks(ctx, tasks, model_ids, false);
    return DimensionResult{out.records, out.gaps};
}

ScheduleResult run_schedule_comparison(const EvalContext& ctx, const std::string& cet_name,
                                       const GeneratorHandle& base,
                                       const std::string& target_phrase, std::size_t max_k) {
    require_context(ctx);
    const ConceptTree& tree = *ctx.tree;
    const ConceptNode& e = tree.find_by_name(target_phrase);
    const std::vector<std::string> erase_ids = erase_set(tree, e.id);
    if (erase_ids.size() < 2) {
        throw ContractError("schedule comparison needs |erase_set| > 1, '" + target_phrase +
                            "' has " + std::to_string(erase_ids.size()));
    }
    const std::size_t K = max_k == 0 ? erase_ids.size() : std::min(max_k, erase_ids.size());

    EvalContext local = ctx;
    local.verifiers = {ctx.verifiers.front()};  // one curve per arm

    std::vector<std::string> target_names;
    target_names.reserve(erase_ids.size());
    for (const std::string& id : erase_ids) target_names.push_back(tree.node(id).name);

    ScheduleResult result;
    for (std::size_t k = 1; k <= K; ++k) {
        const std::vector<std::string> first_k(target_names.begin(),
                                               target_names.begin() + static_cast<long>(k));
        EditRequest fold;
        fold.cet_name = cet_name;
        fold.base_model_id = base.model_id;
        fold.targets = first_k;
        fold.mode = EditMode::sequential_fold;
        const GeneratorHandle progressive = ctx.gateway->apply_erasure(base, fold);

        EditRequest once = fold;
        once.mode = EditMode::single_call;
        const GeneratorHandle all_at_once = ctx.gateway->apply_erasure(base, once);

        // Both arms are measured on the same first-k concepts.
        std::vector<ProbeTask> tasks;
        for (std::size_t i = 0; i < k; ++i) {
            const ConceptNode& c = tree.node(erase_ids[i]);
            ProbeTask task;
            task.dimension = Dimension::neighbor_erase;
            task.target = e.name;
            task.concept_id = c.id;
            task.prompt_id = c.id;
            task.prompt = render_prompt_text(c.attributes, object_name_of(tree, c));
            task.probe_phrase = c.name;
            task.edit_distance = attribute_edit_distance(e.attributes, c.attributes);
            task.group = "k=" + std::to_string(k);
            tasks.push_back(std::move(task));
        }

        result.ks.push_back(static_cast<int>(k));
        const auto measure = [&](const GeneratorHandle& handle, std::vector<double>& curve,
                                 std::vector<std::string>& names) {
            TaskRunOutput out = run_probe_tasks(local, tasks, {handle.model_id}, false);
            curve.push_back(target_accuracy(out.records).mean);
            names.push_back(handle.model_id);
            result.records.insert(result.records.end(),
                                  std::make_move_iterator(out.records.begin()),
                                  std::make_move_iterator(out.records.end()));
            result.gaps.insert(result.gaps.end(), out.gaps.begin(), out.gaps.end());
        };
        measure(progressive, result.progressive, result.progressive_model_ids);
        measure(all_at_once, result.all_at_once, result.all_at_once_model_ids);
    }
    return result;
}

AttentionAnalysis run_attention_analysis(const EvalContext& ctx, const std::string& target_phrase,
                                         const std::vector<std::string>& model_ids) {
    require_context(ctx);
    const ConceptTree& tree = *ctx.tree;
    const ConceptNode& e = tree.find_by_name(target_phrase);
    if (e.level == Level::superclass) {
        throw ContractError("attention analysis expects an object or variant target");
    }

    EvalContext local = ctx;
    local.verifiers = {ctx.verifiers.front()};

    std::vector<ProbeTask> tasks;
    for (const std::string& id : erase_set(tree, e.id)) {
        const ConceptNode& c = tree.node(id);
        ProbeTask task;
        task.dimension = Dimension::neighbor_erase;
        task.target = e.name;
        task.concept_id = c.id;
        task.prompt_id = c.id;
        task.prompt = render_prompt_text(c.attributes, object_name_of(tree, c));
        task.probe_phrase = c.name;
        task.edit_distance = attribute_edit_distance(e.attributes, c.attributes);
        task.group = bin_label_for(static_cast<double>(*task.edit_distance), ctx.edit_bin_edges,
                                   DistanceKind::edit_distance);
        tasks.push_back(std::move(task));
    }

    AttentionAnalysis analysis;
    for (const std::string& model_id : model_ids) {
        double spread_sum = 0.0;
        std::size_t spread_count = 0;
        std::mutex hook_mutex;
        const ImageHook hook = [&](const std::string&, const ProbeTask& task,
                                   const ImageRecord& image) {
            const double s = concept_spread(image, task.probe_phrase);
            std::lock_guard<std::mutex> lock(hook_mutex);
            spread_sum += s;
            spread_count += 1;
        };
        TaskRunOutput out = run_probe_tasks(local, tasks, {model_id}, true, hook);
        if (spread_count == 0) {
            throw BackendError("attention analysis got no images for model " + model_id);
        }
        ScatterPoint point;
        point.model_id = model_id;
        point.target_accuracy = target_accuracy(out.records).mean;
        point.mean_spread = spread_sum / static_cast<double>(spread_count);
        analysis.points.push_back(point);
        analysis.records.insert(analysis.records.end(),
                                std::make_move_iterator(out.records.begin()),
                                std::make_move_iterator(out.records.end()));
        analysis.gaps.insert(analysis.gaps.end(), out.gaps.begin(), out.gaps.end());
    }
    analysis.correlation = correlate_spread_with_accuracy(analysis.points);
    return analysis;
}

namespace {

json record_to_json(const EvalRecord& record) {
    json j{{"dimension", to_string(record.dimension)},
           {"model_id", record.model_id},
           {"target", record.target},
           {"concept_id", record.concept_id},
           {"probe", record.probe},
           {"group", record.group},
           {"verifier_id", record.verifier_id},
           {"seeds", record.seeds},
           {"outcomes", json::array()}};
    for (const Outcome outcome : record.outcomes) j["outcomes"].push_back(to_string(outcome));
    if (record.edit_distance) j["edit_distance"] = *record.edit_distance;
    if (record.similarity) j["similarity"] = *record.similarity;
    return j;
}

EvalRecord record_from_json(const json& j) {
    EvalRecord record;
    record.dimension = dimension_from_string(j.at("dimension").get<std::string>());
    record.model_id = j.at("model_id").get<std::string>();
    record.target = j.at("target").get<std::string>();
    record.concept_id = j.at("concept_id").get<std::string>();
    record.probe = j.at("probe").get<std::string>();
    record.group = j.at("group").get<std::string>();
    record.verifier_id = j.at("verifier_id").get<std::string>();
    record.seeds = j.at("seeds").get<std::vector<std::uint32_t>>();
    for (const auto& o : j.at("outcomes")) {
        record.outcomes.push_back(outcome_from_string(o.get<std::string>()));
    }
    if (j.count("edit_distance") > 0) record.edit_distance = j.at("edit_distance").get<int>();
    if (j.count("similarity") > 0) record.similarity = j.at("similarity").get<double>();
    return record;
}

}  // namespace

std::string eval_records_to_jsonl(std::vector<EvalRecord> records) {
    const auto sort_key = [](const EvalRecord& r) {
        return std::make_tuple(to_string(r.dimension), r.model_id, r.verifier_id, r.concept_id,
                               r.probe, r.group, r.target);
    };
    std::sort(records.begin(), records.end(),
              [&](const EvalRecord& a, const EvalRecord& b) { return sort_key(a) < sort_key(b); });
    std::string out;
    for (const EvalRecord& record : records) {
        out += record_to_json(record).dump();
        out += '\n';
    }
    return out;
}

std::vector<EvalRecord> eval_records_from_jsonl(const std::string& text) {
    std::vector<EvalRecord> records;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        const std::string line = text.substr(start, end - start);
        start = end + 1;
        if (line.empty()) continue;
        records.push_back(record_from_json(json::parse(line)));
    }
    return records;
}

}  // namespace see
