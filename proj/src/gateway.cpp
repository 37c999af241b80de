#include "see/gateway.hpp"

#include "see/util.hpp"

namespace see {

std::string to_string(EditMode mode) {
    switch (mode) {
        case EditMode::single_call: return "single_call";
        case EditMode::sequential_fold: return "sequential_fold";
    }
    throw ContractError("unhandled edit mode");
}

EditMode edit_mode_from_string(const std::string& text) {
    if (text == "single_call") return EditMode::single_call;
    if (text == "sequential_fold") return EditMode::sequential_fold;
    throw ConfigError("unknown edit mode '" + text + "' (expected single_call or sequential_fold)");
}

std::string model_id_digest(const std::string& backend_base_id,
                            const std::vector<EditRequest>& provenance) {
    std::string blob = "base\x1f" + backend_base_id;
    for (const auto& edit : provenance) {
        blob += "\x1e";
        blob += edit.cet_name;
        blob += '\x1f';
        blob += to_string(edit.mode);
        for (const auto& target : edit.targets) {
            blob += '\x1f';
            blob += target;
        }
    }
    return "m-" + fnv1a64_hex(blob);
}

ModelGateway::ModelGateway(std::shared_ptr<GeneratorBackend> backend,
                           std::shared_ptr<CetAdapter> adapter)
    : backend_(std::move(backend)), adapter_(std::move(adapter)) {
    if (!backend_) throw ContractError("gateway needs a generator backend");
}

GeneratorHandle ModelGateway::register_entry(const std::string& backend_model_id,
                                             std::vector<EditRequest> provenance) {
    GeneratorHandle handle;
    handle.model_id = model_id_digest(backend_model_id_base_, provenance);
    handle.capabilities = backend_->capabilities();
    handle.provenance = std::move(provenance);
    entries_[handle.model_id] = Entry{handle, backend_model_id};
    return handle;
}

GeneratorHandle ModelGateway::register_base(const std::string& backend_model_id) {
    if (backend_model_id.empty()) throw ContractError("base model id must be non-empty");
    if (!backend_model_id_base_.empty() && backend_model_id_base_ != backend_model_id) {
        throw ContractError("gateway already anchored to base '" + backend_model_id_base_ + "'");
    }
    backend_model_id_base_ = backend_model_id;
    return register_entry(backend_model_id, {});
}

const ModelGateway::Entry& ModelGateway::entry(const std::string& model_id) const {
    auto it = entries_.find(model_id);
    if (it == entries_.end()) throw LookupError("no model registered under id '" + model_id + "'");
    return it->second;
}

const GeneratorHandle& ModelGateway::handle(const std::string& model_id) const {
    return entry(model_id).handle;
}

bool ModelGateway::has_model(const std::string& model_id) const {
    return entries_.count(model_id) != 0;
}

GeneratorHandle ModelGateway::apply_erasure(const GeneratorHandle& base,
                                            const EditRequest& request) {
    if (!adapter_) throw ContractError("gateway has no erasure adapter attached");
    if (request.cet_name.empty()) throw ContractError("edit request needs a cet_name");
    if (request.targets.empty()) throw ContractError("edit request needs at least one target");
    for (const auto& target : request.targets) {
        if (target.empty()) throw ContractError("edit targets must be non-empty");
    }
    const Entry& base_entry = entry(base.model_id);

    // Provenance records one entry per adapter invocation.
    std::vector<EditRequest> provenance = base_entry.handle.provenance;
    if (request.mode == EditMode::single_call) {
        EditRequest applied = request;
        applied.base_model_id = base_entry.backend_model_id;
        provenance.push_back(applied);
    } else {
        for (const auto& target : request.targets) {
            EditRequest step;
            step.cet_name = request.cet_name;
            step.targets = {target};
            step.mode = EditMode::sequential_fold;
            provenance.push_back(step);
        }
    }

    const std::string final_id = model_id_digest(backend_model_id_base_, provenance);
    if (auto it = entries_.find(final_id); it != entries_.end()) {
        return it->second.handle;  // identical history: cache hit, adapter untouched
    }

    if (request.mode == EditMode::single_call) {
        EditRequest call = provenance.back();
        std::string backend_id;
        try {
            ++adapter_calls_;
            backend_id = adapter_->apply(call);
        } catch (const BackendError& e) {
            throw BackendError("erasure '" + request.cet_name + "' failed (single call, " +
                               std::to_string(request.targets.size()) +
                               " targets): " + e.what());
        }
        return register_entry(backend_id, std::move(provenance));
    }

    // Sequential fold: run every step first, commit registrations only once
    // the whole chain has succeeded so a mid-fold failure leaves no trace.
    struct Pending {
        std::string backend_id;
        std::vector<EditRequest> provenance;
    };
    std::vector<Pending> pending;
    std::string backend_id = base_entry.backend_model_id;
    std::vector<EditRequest> steps = base_entry.handle.provenance;
    for (std::size_t i = 0; i < request.targets.size(); ++i) {
        EditRequest step;
        step.cet_name = request.cet_name;
        step.base_model_id = backend_id;
        step.targets = {request.targets[i]};
        step.mode = EditMode::sequential_fold;
        steps.push_back(step);

        const std::string step_id = model_id_digest(backend_model_id_base_, steps);
        if (auto it = entries_.find(step_id); it != entries_.end()) {
            backend_id = it->second.backend_model_id;
            continue;
        }
        try {
            ++adapter_calls_;
            backend_id = adapter_->apply(step);
        } catch (const BackendError& e) {
            throw BackendError("erasure '" + request.cet_name + "' failed at fold step " +
                               std::to_string(i + 1) + " of " +
                               std::to_string(request.targets.size()) + " (target '" +
                               request.targets[i] + "'): " + e.what());
        }
        pending.push_back(Pending{backend_id, steps});
    }
    for (auto& p : pending) {
        register_entry(p.backend_id, std::move(p.provenance));
    }
    return handle(final_id);
}

ImageRecord ModelGateway::generate(const GeneratorHandle& handle, const GenerateRequest& request) {
    if (request.prompt.empty()) throw ContractError("generate request needs a prompt");
    const Entry& e = entry(handle.model_id);
    ImageRecord record = backend_->generate(e.backend_model_id, request);
    record.prompt_id = request.prompt_id;
    record.seed = request.seed;
    record.model_id = handle.model_id;
    if (!request.want_attention) record.attention.clear();
    if (request.want_attention && !e.handle.capabilities.returns_attention_maps &&
        !record.attention.empty()) {
        throw BackendError("backend '" + backend_->name() +
                           "' returned attention maps it does not advertise");
    }
    return record;
}

GenerateBatchResult ModelGateway::generate_batch(const GeneratorHandle& handle,
                                                 const std::vector<GenerateRequest>& requests) {
    GenerateBatchResult result;
    result.records.reserve(requests.size());
    for (const auto& request : requests) {
        try {
            result.records.push_back(generate(handle, request));
        } catch (const BackendError& e) {
            result.gaps.push_back(GenerationGap{request.prompt_id, request.seed, e.what()});
        }
    }
    return result;
}

}  // namespace see
