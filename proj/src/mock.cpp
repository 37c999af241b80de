#include "see/mock.hpp"

#include <algorithm>

#include <json.hpp>

#include "see/distance.hpp"
#include "see/util.hpp"

namespace see {

using nlohmann::json;

void MockConfig::validate() const {
    if (collateral_radius < 0) throw ConfigError("mock collateral_radius must be >= 0");
    if (collateral_probability < 0.0 || collateral_probability > 1.0) {
        throw ConfigError("mock collateral_probability must lie in [0, 1]");
    }
    if (attention_height < 1 || attention_width < 1) {
        throw ConfigError("mock attention grid must be at least 1x1");
    }
}

MockConfig mock_config_from_json(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("bad mock config JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("mock config must be a JSON object");
    MockConfig config;
    static const std::set<std::string> known = {
        "collateral_radius", "collateral_probability", "rng_seed",        "leak_attributes",
        "weak_single_call",  "fail_substring",         "attention_height", "attention_width"};
    for (const auto& [key, value] : j.items()) {
        if (!known.count(key)) throw ConfigError("unknown mock config key '" + key + "'");
        try {
            if (key == "collateral_radius") config.collateral_radius = value.get<int>();
            else if (key == "collateral_probability") config.collateral_probability = value.get<double>();
            else if (key == "rng_seed") config.rng_seed = value.get<std::uint64_t>();
            else if (key == "leak_attributes") config.leak_attributes = value.get<bool>();
            else if (key == "weak_single_call") config.weak_single_call = value.get<bool>();
            else if (key == "fail_substring") config.fail_substring = value.get<std::string>();
            else if (key == "attention_height") config.attention_height = value.get<int>();
            else if (key == "attention_width") config.attention_width = value.get<int>();
        } catch (const json::type_error&) {
            throw ConfigError("mock config key '" + key + "' has the wrong type");
        }
    }
    config.validate();
    return config;
}

std::string mock_config_to_json(const MockConfig& config) {
    json j;
    j["collateral_radius"] = config.collateral_radius;
    j["collateral_probability"] = config.collateral_probability;
    j["rng_seed"] = config.rng_seed;
    j["leak_attributes"] = config.leak_attributes;
    j["weak_single_call"] = config.weak_single_call;
    j["fail_substring"] = config.fail_substring;
    j["attention_height"] = config.attention_height;
    j["attention_width"] = config.attention_width;
    return j.dump();
}

MockStack::MockStack(std::shared_ptr<const ConceptTree> tree, MockConfig config,
                     AttributeVocabulary vocab)
    : tree_(std::move(tree)), config_(std::move(config)), lexicon_(*tree_, std::move(vocab)) {
    if (!tree_) throw ContractError("mock stack needs a concept tree");
    config_.validate();
    states_[kMockBaseModelId] = State{};
}

Capabilities MockStack::capabilities() const {
    Capabilities caps;
    caps.returns_attention_maps = true;
    caps.max_concurrent_requests = 1;
    return caps;
}

const MockStack::State& MockStack::state_of(const std::string& backend_model_id) const {
    auto it = states_.find(backend_model_id);
    if (it == states_.end()) {
        throw BackendError("mock has no model '" + backend_model_id + "'");
    }
    return it->second;
}

const ConceptNode& MockStack::resolve_phrase(const std::string& phrase) const {
    // Normalize through the parser so attribute order never matters, then
    // look the canonical name up in the tree.
    ParsedConcept parsed;
    try {
        parsed = parse_concept_phrase(phrase, lexicon_);
    } catch (const Error& e) {
        throw BackendError("mock cannot resolve concept '" + phrase + "': " + e.what());
    }
    const std::string canonical = render_class_label(parsed.attributes, parsed.object);
    try {
        return tree_->find_by_name(canonical);
    } catch (const LookupError&) {
        throw BackendError("mock cannot resolve concept '" + phrase + "': not in the catalog");
    }
}

std::string MockStack::apply(const EditRequest& request) {
    if (request.targets.empty()) throw BackendError("mock erase needs at least one target");

    std::lock_guard<std::mutex> lock(mutex_);
    const State& base = state_of(request.base_model_id);

    std::vector<std::string> effective = request.targets;
    if (request.mode == EditMode::single_call && config_.weak_single_call && effective.size() > 1) {
        effective.resize(1);
    }

    std::set<std::string> suppressed = base.suppressed;
    for (const auto& phrase : effective) {
        const ConceptNode& target = resolve_phrase(phrase);
        suppressed.insert(target.id);
        if (config_.collateral_radius <= 0 || target.level == Level::superclass) continue;

        // Collateral hits land on the target's object family: every node
        // within the configured edit distance, drawn order-independently so
        // folding order cannot change the outcome.
        const std::string family_id =
            target.level == Level::object ? target.id : *target.parent_id;
        std::vector<std::string> family = {family_id};
        const auto& kids = tree_->children(family_id);
        family.insert(family.end(), kids.begin(), kids.end());
        for (const auto& candidate_id : family) {
            if (candidate_id == target.id) continue;
            const ConceptNode& candidate = tree_->node(candidate_id);
            const int d = attribute_edit_distance(target.attributes, candidate.attributes);
            if (d > config_.collateral_radius) continue;
            const double q = config_.collateral_probability;
            bool hit;
            if (q >= 1.0) hit = true;
            else if (q <= 0.0) hit = false;
            else hit = keyed_uniform(config_.rng_seed, target.id, candidate_id) < q;
            if (hit) suppressed.insert(candidate_id);
        }
    }

    std::string blob;
    for (const auto& id : suppressed) {
        blob += id;
        blob += '\n';
    }
    const std::string model_id = "mock-" + fnv1a64_hex(blob);
    states_[model_id] = State{std::move(suppressed)};
    return model_id;
}

std::set<std::string> MockStack::suppression_set(const std::string& backend_model_id) const {
    std::lock_guard<std::mutex> lock(mutex_);
    return state_of(backend_model_id).suppressed;
}

ImageRecord MockStack::generate(const std::string& backend_model_id,
                                const GenerateRequest& request) {
    if (!config_.fail_substring.empty() &&
        request.prompt.find(config_.fail_substring) != std::string::npos) {
        throw BackendError("mock configured to fail on prompts containing '" +
                           config_.fail_substring + "'");
    }

    std::vector<ParsedConcept> segments;
    try {
        segments = parse_prompt_text(request.prompt, lexicon_);
    } catch (const Error& e) {
        throw BackendError("mock cannot parse prompt '" + request.prompt + "': " + e.what());
    }
    if (segments.empty()) {
        throw BackendError("mock found no concept in prompt '" + request.prompt + "'");
    }

    struct Segment {
        const ConceptNode* node;
        AttributeMap render_attrs;
        bool suppressed;
    };
    std::vector<Segment> rendered;
    {
        std::lock_guard<std::mutex> lock(mutex_);
        const State& state = state_of(backend_model_id);
        for (const auto& parsed : segments) {
            const ConceptNode& node =
                resolve_phrase(render_class_label(parsed.attributes, parsed.object));
            rendered.push_back(Segment{&node, parsed.attributes, state.suppressed.count(node.id) > 0});
        }
    }

    // Attribute leakage: a suppressed leading object donates its attributes
    // to the surviving objects (empty slots only; nothing is overwritten).
    if (config_.leak_attributes && rendered.size() >= 2 && rendered.front().suppressed) {
        for (std::size_t i = 1; i < rendered.size(); ++i) {
            if (rendered[i].suppressed) continue;
            for (const auto& [slot, value] : rendered.front().render_attrs) {
                rendered[i].render_attrs.emplace(slot, value);
            }
        }
    }

    json payload_rendered = json::array();
    for (const auto& segment : rendered) {
        if (segment.suppressed) continue;
        json entry;
        if (segment.node->level == Level::superclass) {
            entry["object"] = segment.node->name;
            entry["superclass"] = segment.node->name;
        } else {
            const ConceptNode& object_node = segment.node->level == Level::object
                                                 ? *segment.node
                                                 : tree_->node(*segment.node->parent_id);
            entry["object"] = object_node.name;
            entry["superclass"] = tree_->node(*object_node.parent_id).name;
        }
        entry["attributes"] = json(segment.render_attrs);
        payload_rendered.push_back(entry);
    }

    json payload;
    payload["model"] = backend_model_id;
    payload["prompt"] = request.prompt;
    payload["rendered"] = payload_rendered;
    payload["seed"] = request.seed;

    ImageRecord record;
    record.prompt_id = request.prompt_id;
    record.seed = request.seed;
    record.payload = kSyntheticPrefix + payload.dump();

    if (request.want_attention) {
        const int h = config_.attention_height;
        const int w = config_.attention_width;
        const std::size_t cells = static_cast<std::size_t>(h) * static_cast<std::size_t>(w);
        for (const auto& segment : rendered) {
            const std::string phrase =
                render_class_label(segment.render_attrs, segment.node->level == Level::variant
                                                             ? tree_->node(*segment.node->parent_id).name
                                                             : segment.node->name);
            for (const auto& token : split_words(phrase)) {
                if (record.attention.count(token)) continue;  // first mention wins
                AttentionGrid grid;
                grid.height = h;
                grid.width = w;
                // Suppressed concepts collapse to a one-hot map; rendered
                // concepts disperse uniformly.  Spread then tracks accuracy.
                if (segment.suppressed) {
                    grid.data.assign(cells, 0.0);
                    grid.data[fnv1a64(token) % cells] = 1.0;
                } else {
                    grid.data.assign(cells, 1.0);
                }
                record.attention.emplace(token, std::move(grid));
            }
        }
    }
    return record;
}

bool is_synthetic_payload(const std::string& payload) {
    return payload.rfind(kSyntheticPrefix, 0) == 0;
}

std::vector<RenderedConcept> parse_synthetic_payload(const std::string& payload) {
    if (!is_synthetic_payload(payload)) {
        throw ContractError("not a synthetic payload (expected '" +
                            std::string(kSyntheticPrefix) + "' prefix)");
    }
    json j;
    try {
        j = json::parse(payload.substr(std::string(kSyntheticPrefix).size()));
    } catch (const json::parse_error& e) {
        throw ContractError(std::string("corrupt synthetic payload: ") + e.what());
    }
    std::vector<RenderedConcept> out;
    for (const auto& entry : j.at("rendered")) {
        RenderedConcept item;
        item.object = entry.at("object").get<std::string>();
        item.superclass = entry.at("superclass").get<std::string>();
        for (const auto& [slot, value] : entry.at("attributes").items()) {
            item.attributes[slot] = value.get<std::string>();
        }
        out.push_back(std::move(item));
    }
    return out;
}

}  // namespace see
