#include "see/protocol.hpp"

#include <cstdlib>

#include <httplib.h>
#include <json.hpp>

#include "see/util.hpp"

namespace see {

namespace {

using nlohmann::json;

json parse_or_throw(const std::string& body, const char* what) {
    try {
        return json::parse(body);
    } catch (const json::exception& error) {
        throw BackendError(std::string(what) + ": malformed JSON (" + error.what() + ")");
    }
}

template <typename T>
T field(const json& j, const char* key, const char* what) {
    if (j.count(key) == 0) {
        throw BackendError(std::string(what) + ": missing field '" + key + "'");
    }
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw BackendError(std::string(what) + ": field '" + key + "' has the wrong type");
    }
}

json attention_grid_to_json(const AttentionGrid& grid) {
    return json{{"height", grid.height}, {"width", grid.width}, {"data", grid.data}};
}

AttentionGrid attention_grid_from_json(const json& j, const std::string& token) {
    AttentionGrid grid;
    const std::string what = "attention grid for token '" + token + "'";
    grid.height = field<int>(j, "height", what.c_str());
    grid.width = field<int>(j, "width", what.c_str());
    grid.data = field<std::vector<double>>(j, "data", what.c_str());
    if (grid.height < 1 || grid.width < 1 ||
        grid.data.size() !=
            static_cast<std::size_t>(grid.height) * static_cast<std::size_t>(grid.width)) {
        throw BackendError(what + " has inconsistent dimensions");
    }
    for (const double cell : grid.data) {
        if (cell < 0.0) throw BackendError(what + " carries negative mass");
    }
    return grid;
}

std::string post_json(const std::string& endpoint, const std::string& route,
                      const std::string& body) {
    httplib::Client client(endpoint);
    client.set_connection_timeout(5, 0);
    client.set_read_timeout(60, 0);
    const httplib::Result result = client.Post(route, body, "application/json");
    if (!result) {
        throw BackendError("cannot reach adapter at " + endpoint + route + " (" +
                           httplib::to_string(result.error()) + ")");
    }
    if (result->status != 200) {
        throw BackendError("adapter " + endpoint + route + " returned status " +
                           std::to_string(result->status) + ": " + result->body);
    }
    return result->body;
}

}  // namespace

std::optional<std::string> adapter_endpoint_from_env() {
    const char* value = std::getenv(kAdapterEndpointVar);
    if (value == nullptr || *value == '\0') return std::nullopt;
    return std::string(value);
}

std::optional<std::string> verifier_endpoint_from_env() {
    const char* value = std::getenv(kVerifierEndpointVar);
    if (value == nullptr || *value == '\0') return std::nullopt;
    return std::string(value);
}

std::string generate_request_to_json(const std::string& model_id,
                                     const GenerateRequest& request) {
    return json{{"model_id", model_id},
                {"prompt", request.prompt},
                {"seed", request.seed},
                {"want_attention", request.want_attention}}
        .dump();
}

void generate_request_from_json(const std::string& body, std::string& model_id,
                                GenerateRequest& request) {
    const json j = parse_or_throw(body, "generate request");
    model_id = field<std::string>(j, "model_id", "generate request");
    request.prompt = field<std::string>(j, "prompt", "generate request");
    request.seed = field<std::uint32_t>(j, "seed", "generate request");
    request.want_attention = field<bool>(j, "want_attention", "generate request");
}

std::string generate_response_to_json(const std::string& payload,
                                      const std::map<std::string, AttentionGrid>& attention) {
    json j{{"payload", payload}};
    if (!attention.empty()) {
        json grids = json::object();
        for (const auto& [token, grid] : attention) grids[token] = attention_grid_to_json(grid);
        j["attention"] = std::move(grids);
    }
    return j.dump();
}

void generate_response_from_json(const std::string& body, ImageRecord& record) {
    const json j = parse_or_throw(body, "generate response");
    record.payload = field<std::string>(j, "payload", "generate response");
    record.attention.clear();
    if (j.count("attention") > 0) {
        if (!j.at("attention").is_object()) {
            throw BackendError("generate response: 'attention' must map tokens to grids");
        }
        for (const auto& [token, grid] : j.at("attention").items()) {
            record.attention.emplace(token, attention_grid_from_json(grid, token));
        }
    }
}

std::string edit_request_to_json(const EditRequest& request) {
    return json{{"cet_name", request.cet_name},
                {"base_model_id", request.base_model_id},
                {"targets", request.targets},
                {"mode", to_string(request.mode)}}
        .dump();
}

EditRequest edit_request_from_json(const std::string& body) {
    const json j = parse_or_throw(body, "edit request");
    EditRequest request;
    request.cet_name = field<std::string>(j, "cet_name", "edit request");
    request.base_model_id = field<std::string>(j, "base_model_id", "edit request");
    request.targets = field<std::vector<std::string>>(j, "targets", "edit request");
    request.mode = edit_mode_from_string(field<std::string>(j, "mode", "edit request"));
    return request;
}

std::string edit_response_to_json(const std::string& model_id) {
    return json{{"model_id", model_id}}.dump();
}

std::string edit_response_from_json(const std::string& body) {
    const json j = parse_or_throw(body, "edit response");
    const auto model_id = field<std::string>(j, "model_id", "edit response");
    if (model_id.empty()) throw BackendError("edit response: empty model_id");
    return model_id;
}

std::string verify_classify_request_to_json(const std::string& payload,
                                            const std::vector<std::string>& labels) {
    return json{{"payload", payload}, {"mode", "classify"}, {"labels", labels}}.dump();
}

std::string verify_vqa_request_to_json(const std::string& payload, const std::string& question) {
    return json{{"payload", payload}, {"mode", "vqa"}, {"question", question}}.dump();
}

void verify_request_from_json(const std::string& body, std::string& mode, std::string& payload,
                              std::vector<std::string>& labels, std::string& question) {
    const json j = parse_or_throw(body, "verify request");
    mode = field<std::string>(j, "mode", "verify request");
    payload = field<std::string>(j, "payload", "verify request");
    labels.clear();
    question.clear();
    if (mode == "classify") {
        labels = field<std::vector<std::string>>(j, "labels", "verify request");
    } else if (mode == "vqa") {
        question = field<std::string>(j, "question", "verify request");
    } else {
        throw BackendError("verify request: mode must be 'classify' or 'vqa', got '" + mode +
                           "'");
    }
}

std::string classify_response_to_json(const std::vector<double>& scores) {
    return json{{"scores", scores}}.dump();
}

std::vector<double> classify_response_from_json(const std::string& body) {
    return field<std::vector<double>>(parse_or_throw(body, "classify response"), "scores",
                                      "classify response");
}

std::string vqa_response_to_json(const std::string& answer) {
    return json{{"answer", answer}}.dump();
}

std::string vqa_response_from_json(const std::string& body) {
    return field<std::string>(parse_or_throw(body, "vqa response"), "answer", "vqa response");
}

std::string capabilities_to_json(const Capabilities& capabilities) {
    return json{{"returns_attention_maps", capabilities.returns_attention_maps},
                {"max_concurrent_requests", capabilities.max_concurrent_requests}}
        .dump();
}

Capabilities capabilities_from_json(const std::string& body) {
    const json j = parse_or_throw(body, "capabilities");
    Capabilities capabilities;
    capabilities.returns_attention_maps =
        field<bool>(j, "returns_attention_maps", "capabilities");
    capabilities.max_concurrent_requests =
        field<int>(j, "max_concurrent_requests", "capabilities");
    return capabilities;
}

// --- HTTP clients ---------------------------------------------------------

HttpGeneratorBackend::HttpGeneratorBackend(std::string endpoint)
    : endpoint_(std::move(endpoint)) {}
HttpGeneratorBackend::~HttpGeneratorBackend() = default;

Capabilities HttpGeneratorBackend::capabilities() const {
    std::lock_guard<std::mutex> lock(mutex_);
    if (capabilities_) return *capabilities_;
    httplib::Client client(endpoint_);
    client.set_connection_timeout(5, 0);
    const httplib::Result result = client.Get("/capabilities");
    if (!result) {
        throw BackendError("cannot reach adapter at " + endpoint_ + "/capabilities (" +
                           httplib::to_string(result.error()) + ")");
    }
    if (result->status == 404) {
        capabilities_ = Capabilities{};  // legacy adapter: assume the minimum
    } else if (result->status == 200) {
        capabilities_ = capabilities_from_json(result->body);
    } else {
        throw BackendError("adapter " + endpoint_ + "/capabilities returned status " +
                           std::to_string(result->status));
    }
    return *capabilities_;
}

ImageRecord HttpGeneratorBackend::generate(const std::string& backend_model_id,
                                           const GenerateRequest& request) {
    try {
        const std::string body =
            post_json(endpoint_, "/generate", generate_request_to_json(backend_model_id, request));
        ImageRecord record;
        generate_response_from_json(body, record);
        return record;
    } catch (const BackendError& error) {
        throw BackendError(error.what(), request.prompt_id, request.seed);
    }
}

HttpCetAdapter::HttpCetAdapter(std::string endpoint) : endpoint_(std::move(endpoint)) {}
HttpCetAdapter::~HttpCetAdapter() = default;

std::string HttpCetAdapter::apply(const EditRequest& request) {
    return edit_response_from_json(
        post_json(endpoint_, "/edit", edit_request_to_json(request)));
}

HttpVerifierBackend::HttpVerifierBackend(std::string endpoint, std::string verifier_id,
                                         std::string version)
    : endpoint_(std::move(endpoint)), id_(std::move(verifier_id)), version_(std::move(version)) {}
HttpVerifierBackend::~HttpVerifierBackend() = default;

std::vector<double> HttpVerifierBackend::classify_scores(const std::string& payload,
                                                         const std::vector<std::string>& labels) {
    nlohmann::json j = nlohmann::json::parse(verify_classify_request_to_json(payload, labels));
    j["verifier_id"] = id_;  // routing extension: one endpoint, many models
    return classify_response_from_json(post_json(endpoint_, "/verify", j.dump()));
}

std::string HttpVerifierBackend::vqa_answer(const std::string& payload,
                                            const std::string& question) {
    nlohmann::json j = nlohmann::json::parse(verify_vqa_request_to_json(payload, question));
    j["verifier_id"] = id_;
    return vqa_response_from_json(post_json(endpoint_, "/verify", j.dump()));
}

}  // namespace see
