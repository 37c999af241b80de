#pragma once

// Concept-presence verification.  Two probe families share one facade:
// zero-shot classification (argmax over a label set) and yes/no VQA.  Every
// verifier is reported as its own column downstream — never a majority vote.
// The oracle verifier reads mock payload ground truth exactly and stands in
// for the real models at desk scale.

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "see/gateway.hpp"
#include "see/prompts.hpp"

namespace see {

enum class Outcome { present, absent, indeterminate };

std::string to_string(Outcome outcome);
Outcome outcome_from_string(const std::string& text);

struct VerifierVerdict {
    // Image key.
    std::string prompt_id;
    std::uint32_t seed = 0;
    std::string model_id;

    std::string verifier_id;
    std::string probe;  // concept phrase (classify) or question (vqa)
    Outcome outcome = Outcome::indeterminate;
    std::optional<double> score;
    std::string raw_answer;  // raw VQA answer text, retained verbatim
};

struct ClassifyResult {
    std::vector<std::string> labels;
    std::vector<double> scores;
    std::string chosen;  // argmax label; ties broken by label order
};

/// One verification model (or the oracle).  Implementations must be pure:
/// identical (payload, probe) pairs always produce identical raw responses.
class VerifierBackend {
public:
    virtual ~VerifierBackend() = default;
    virtual std::string id() const = 0;
    virtual std::string version() const { return "1"; }
    virtual int max_concurrent_requests() const { return 1; }
    virtual std::vector<double> classify_scores(const std::string& payload,
                                                const std::vector<std::string>& labels) = 0;
    virtual std::string vqa_answer(const std::string& payload, const std::string& question) = 0;
};

/// Reads synthetic payload ground truth: a probe phrase is present iff some
/// rendered concept matches its object (or superclass) and carries at least
/// the probe's attributes.
class OracleVerifier final : public VerifierBackend {
public:
    explicit OracleVerifier(std::shared_ptr<const ConceptTree> tree,
                            AttributeVocabulary vocab = AttributeVocabulary{},
                            std::string id = "oracle");

    std::string id() const override { return id_; }
    std::vector<double> classify_scores(const std::string& payload,
                                        const std::vector<std::string>& labels) override;
    std::string vqa_answer(const std::string& payload, const std::string& question) override;

    bool phrase_present(const std::string& payload, const std::string& phrase) const;

private:
    std::shared_ptr<const ConceptTree> tree_;
    ConceptLexicon lexicon_;
    std::string id_;
};

// Yes/no normalization: lowercase, strip punctuation, accept a leading
// "yes"/"no" token; anything else is indeterminate.
Outcome normalize_yes_no(const std::string& raw);

// Extracts the concept phrase from a render_question-shaped question
// ("Is there a red cup in the image?" -> "red cup").
std::string question_concept(const std::string& question);

enum class ProbeMode { classify, vqa };

std::string to_string(ProbeMode mode);
ProbeMode probe_mode_from_string(const std::string& text);

struct Probe {
    ProbeMode mode = ProbeMode::classify;
    std::string concept_phrase;        // whose presence is being decided
    std::vector<std::string> labels;   // classify: full label set, probe first
    std::string question;              // vqa
};

// Classification probe: probe phrase first, then the alternatives, deduped.
// The probe-first order makes argmax ties resolve toward the probe; the
// score > 0 guard in presence() keeps all-zero responses from counting as
// present.
Probe make_classify_probe(const std::string& concept_phrase,
                          const std::vector<std::string>& alternatives);

// VQA probe over the standard question template.
Probe make_vqa_probe(const std::string& concept_phrase);

/// Registry + verdict cache.  Verdicts are pure functions of
/// (payload digest, probe, verifier id, verifier version); the cache is
/// thread-safe with last-write-wins on identical keys.
class VerifierBank {
public:
    void register_backend(std::shared_ptr<VerifierBackend> backend);
    bool has(const std::string& verifier_id) const;
    std::vector<std::string> verifier_ids() const;
    VerifierBackend& backend(const std::string& verifier_id) const;

    // Raw classification: scores over all labels, argmax chosen, ties by
    // label order. Requires >= 2 distinct labels.
    ClassifyResult classify(const ImageRecord& image, const std::vector<std::string>& labels,
                            const std::string& verifier_id);

    // Yes/no presence for a rendered question.
    VerifierVerdict vqa_presence(const ImageRecord& image, const std::string& question,
                                 const std::string& verifier_id);

    // Uniform facade: classification maps to present iff the probed concept
    // is the argmax label with positive score.
    VerifierVerdict presence(const ImageRecord& image, const Probe& probe,
                             const std::string& verifier_id);

    std::size_t cache_hits() const;
    std::size_t cache_misses() const;
    // Data-quality tally: indeterminate verdicts seen, per verifier.
    std::map<std::string, std::size_t> indeterminate_tally() const;

private:
    struct Cached {
        Outcome outcome;
        std::optional<double> score;
        std::string raw_answer;
    };

    std::shared_ptr<VerifierBackend> backend_ptr(const std::string& verifier_id) const;
    void note_outcome(const std::string& verifier_id, Outcome outcome);

    std::map<std::string, std::shared_ptr<VerifierBackend>> backends_;
    mutable std::mutex mutex_;
    std::map<std::string, Cached> verdict_cache_;
    std::map<std::string, ClassifyResult> classify_cache_;
    std::size_t hits_ = 0;
    std::size_t misses_ = 0;
    std::map<std::string, std::size_t> indeterminate_;
};

}  // namespace see
