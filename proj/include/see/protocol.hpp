#pragma once

// Wire protocol for out-of-process generator, CET, and verifier adapters.
// The JSON message schema is normative; transport is HTTP POST on three
// routes (/generate, /edit, /verify) plus GET /capabilities.  Endpoints are
// discovered from environment variables so a run config stays portable
// across machines.

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "see/gateway.hpp"
#include "see/verifier.hpp"

namespace see {

inline constexpr const char* kAdapterEndpointVar = "SEE_ADAPTER_ENDPOINT";
inline constexpr const char* kVerifierEndpointVar = "SEE_VERIFIER_ENDPOINT";

std::optional<std::string> adapter_endpoint_from_env();
std::optional<std::string> verifier_endpoint_from_env();

// --- message codecs --------------------------------------------------------
// Encoders produce the request bodies the harness sends; decoders parse the
// adapter's responses and throw BackendError on malformed payloads. The
// *_request_from_json / *_response_to_json halves exist so an adapter can be
// implemented in-process (the loopback tests serve both sides).

std::string generate_request_to_json(const std::string& model_id, const GenerateRequest& request);
void generate_request_from_json(const std::string& body, std::string& model_id,
                                GenerateRequest& request);
std::string generate_response_to_json(const std::string& payload,
                                      const std::map<std::string, AttentionGrid>& attention);
void generate_response_from_json(const std::string& body, ImageRecord& record);

std::string edit_request_to_json(const EditRequest& request);
EditRequest edit_request_from_json(const std::string& body);
std::string edit_response_to_json(const std::string& model_id);
std::string edit_response_from_json(const std::string& body);

std::string verify_classify_request_to_json(const std::string& payload,
                                            const std::vector<std::string>& labels);
std::string verify_vqa_request_to_json(const std::string& payload, const std::string& question);
// mode out-param is "classify" or "vqa".
void verify_request_from_json(const std::string& body, std::string& mode, std::string& payload,
                              std::vector<std::string>& labels, std::string& question);
std::string classify_response_to_json(const std::vector<double>& scores);
std::vector<double> classify_response_from_json(const std::string& body);
std::string vqa_response_to_json(const std::string& answer);
std::string vqa_response_from_json(const std::string& body);

std::string capabilities_to_json(const Capabilities& capabilities);
Capabilities capabilities_from_json(const std::string& body);

// --- HTTP adapter clients ---------------------------------------------------

/// Generator served over HTTP: POST /generate, GET /capabilities.
class HttpGeneratorBackend final : public GeneratorBackend {
public:
    explicit HttpGeneratorBackend(std::string endpoint);
    ~HttpGeneratorBackend() override;

    std::string name() const override { return "http:" + endpoint_; }
    Capabilities capabilities() const override;
    ImageRecord generate(const std::string& backend_model_id,
                         const GenerateRequest& request) override;

private:
    std::string endpoint_;
    mutable std::mutex mutex_;
    mutable std::optional<Capabilities> capabilities_;
};

/// CET adapter served over HTTP: POST /edit.
class HttpCetAdapter final : public CetAdapter {
public:
    explicit HttpCetAdapter(std::string endpoint);
    ~HttpCetAdapter() override;

    std::string name() const override { return "http:" + endpoint_; }
    std::string apply(const EditRequest& request) override;

private:
    std::string endpoint_;
};

/// Verifier served over HTTP: POST /verify with mode classify or vqa. One
/// endpoint can host several verifier models; the id is sent with each
/// request.
class HttpVerifierBackend final : public VerifierBackend {
public:
    HttpVerifierBackend(std::string endpoint, std::string verifier_id,
                        std::string version = "1");
    ~HttpVerifierBackend() override;

    std::string id() const override { return id_; }
    std::string version() const override { return version_; }
    std::vector<double> classify_scores(const std::string& payload,
                                        const std::vector<std::string>& labels) override;
    std::string vqa_answer(const std::string& payload, const std::string& question) override;

private:
    std::string endpoint_;
    std::string id_;
    std::string version_;
};

}  // namespace see
