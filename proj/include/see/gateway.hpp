#pragma once

// Model gateway: the seam between the evaluation harness and whichever
// text-to-image stack actually renders images.  The harness only ever sees
// opaque model ids, image payloads, and optional attention grids; backends and
// concept-erasure adapters live behind the two interfaces below so a mock, an
// HTTP bridge, or an in-process diffusion pipeline are interchangeable.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace see {

// How a multi-concept erasure is applied to the base model.
enum class EditMode {
    single_call,      // hand the adapter the whole target list at once
    sequential_fold,  // apply targets one at a time, each on top of the last
};

std::string to_string(EditMode mode);
EditMode edit_mode_from_string(const std::string& text);

// One invocation of a concept-erasure adapter.  Provenance lists these in
// application order, so a sequential fold of k targets produces k entries and
// a single call produces one.
struct EditRequest {
    std::string cet_name;
    std::string base_model_id;
    std::vector<std::string> targets;
    EditMode mode = EditMode::single_call;

    bool operator==(const EditRequest&) const = default;
};

struct Capabilities {
    bool returns_attention_maps = false;
    int max_concurrent_requests = 1;
};

// Handle the harness uses to address a registered model.  `model_id` is a
// digest of the edit history, so identical request sequences resolve to the
// same handle and repeated applications are cache hits.
struct GeneratorHandle {
    std::string model_id;
    Capabilities capabilities;
    std::vector<EditRequest> provenance;
};

// Row-major spatial attention grid for one token.
struct AttentionGrid {
    int height = 0;
    int width = 0;
    std::vector<double> data;  // height * width entries

    bool operator==(const AttentionGrid&) const = default;
};

// One generated image plus bookkeeping the evaluators need.
struct ImageRecord {
    std::string prompt_id;
    std::uint32_t seed = 0;
    std::string model_id;
    std::string payload;  // backend-defined image encoding
    std::map<std::string, AttentionGrid> attention;  // token -> grid
};

struct GenerateRequest {
    std::string prompt_id;
    std::string prompt;
    std::uint32_t seed = 0;
    bool want_attention = false;
};

// A prompt/seed pair the backend failed on; the evaluation drops it from
// every denominator rather than inventing a verdict.
struct GenerationGap {
    std::string prompt_id;
    std::uint32_t seed = 0;
    std::string reason;
};

struct GenerateBatchResult {
    std::vector<ImageRecord> records;
    std::vector<GenerationGap> gaps;
};

// Renders images for an already-registered backend-side model.
class GeneratorBackend {
public:
    virtual ~GeneratorBackend() = default;
    virtual std::string name() const = 0;
    virtual Capabilities capabilities() const = 0;
    // `backend_model_id` is the backend's own identifier (not the harness
    // digest).  Throws BackendError on failure.
    virtual ImageRecord generate(const std::string& backend_model_id,
                                 const GenerateRequest& request) = 0;
};

// Applies one concept-erasure edit and returns the backend-side id of the
// resulting model.
class CetAdapter {
public:
    virtual ~CetAdapter() = default;
    virtual std::string name() const = 0;
    virtual std::string apply(const EditRequest& request) = 0;
};

// Registry that owns the mapping from harness model ids to backend-side
// models, applies erasures idempotently, and batches generation.
class ModelGateway {
public:
    ModelGateway(std::shared_ptr<GeneratorBackend> backend, std::shared_ptr<CetAdapter> adapter);

    // Registers the unedited base model under a stable harness id.
    GeneratorHandle register_base(const std::string& backend_model_id);

    // Applies `request` on top of `base`.  mode == sequential_fold folds the
    // targets left-to-right through the adapter; a failure at step k raises
    // BackendError naming the step and registers nothing.  Re-applying an
    // identical history returns the cached handle without touching the
    // adapter.
    GeneratorHandle apply_erasure(const GeneratorHandle& base, const EditRequest& request);

    const GeneratorHandle& handle(const std::string& model_id) const;
    bool has_model(const std::string& model_id) const;

    ImageRecord generate(const GeneratorHandle& handle, const GenerateRequest& request);

    // Generates every prompt/seed combination, converting per-item backend
    // failures into gaps instead of aborting the batch.
    GenerateBatchResult generate_batch(const GeneratorHandle& handle,
                                       const std::vector<GenerateRequest>& requests);

    std::size_t adapter_calls() const { return adapter_calls_; }

private:
    struct Entry {
        GeneratorHandle handle;
        std::string backend_model_id;
    };

    GeneratorHandle register_entry(const std::string& backend_model_id,
                                   std::vector<EditRequest> provenance);
    const Entry& entry(const std::string& model_id) const;

    std::shared_ptr<GeneratorBackend> backend_;
    std::shared_ptr<CetAdapter> adapter_;
    std::map<std::string, Entry> entries_;  // harness model_id -> entry
    std::string backend_model_id_base_;
    std::size_t adapter_calls_ = 0;
};

// Digest of an edit history; the harness model id.  Stable across runs and
// independent of everything but the base id and the ordered edit list.
std::string model_id_digest(const std::string& backend_base_id,
                            const std::vector<EditRequest>& provenance);

}  // namespace see
