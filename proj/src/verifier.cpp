#include "see/verifier.hpp"

#include <algorithm>
#include <cctype>

#include "see/mock.hpp"
#include "see/util.hpp"

namespace see {

std::string to_string(Outcome outcome) {
    switch (outcome) {
        case Outcome::present: return "present";
        case Outcome::absent: return "absent";
        case Outcome::indeterminate: return "indeterminate";
    }
    throw ContractError("unhandled outcome");
}

Outcome outcome_from_string(const std::string& text) {
    if (text == "present") return Outcome::present;
    if (text == "absent") return Outcome::absent;
    if (text == "indeterminate") return Outcome::indeterminate;
    throw ConfigError("unknown outcome '" + text + "'");
}

std::string to_string(ProbeMode mode) {
    switch (mode) {
        case ProbeMode::classify: return "classify";
        case ProbeMode::vqa: return "vqa";
    }
    throw ContractError("unhandled probe mode");
}

ProbeMode probe_mode_from_string(const std::string& text) {
    if (text == "classify") return ProbeMode::classify;
    if (text == "vqa") return ProbeMode::vqa;
    throw ConfigError("unknown probe mode '" + text + "' (expected classify or vqa)");
}

// --- oracle ---------------------------------------------------------------

OracleVerifier::OracleVerifier(std::shared_ptr<const ConceptTree> tree, AttributeVocabulary vocab,
                               std::string id)
    : tree_(std::move(tree)), lexicon_(*tree_, std::move(vocab)), id_(std::move(id)) {
    if (!tree_) throw ContractError("oracle verifier needs a concept tree");
    if (id_.empty()) throw ContractError("verifier id must be non-empty");
}

bool OracleVerifier::phrase_present(const std::string& payload, const std::string& phrase) const {
    ParsedConcept probe;
    try {
        probe = parse_concept_phrase(phrase, lexicon_);
    } catch (const Error& e) {
        throw BackendError("oracle cannot interpret probe '" + phrase + "': " + e.what());
    }
    const bool superclass_probe = lexicon_.is_superclass(probe.object);

    for (const auto& rendered : parse_synthetic_payload(payload)) {
        const bool name_match = superclass_probe ? rendered.superclass == probe.object
                                                 : rendered.object == probe.object;
        if (!name_match) continue;
        bool attrs_covered = true;
        for (const auto& [slot, value] : probe.attributes) {
            auto it = rendered.attributes.find(slot);
            attrs_covered = attrs_covered && it != rendered.attributes.end() && it->second == value;
        }
        if (attrs_covered) return true;
    }
    return false;
}

std::vector<double> OracleVerifier::classify_scores(const std::string& payload,
                                                    const std::vector<std::string>& labels) {
    std::vector<double> scores;
    scores.reserve(labels.size());
    for (const auto& label : labels) {
        scores.push_back(phrase_present(payload, label) ? 1.0 : 0.0);
    }
    return scores;
}

std::string OracleVerifier::vqa_answer(const std::string& payload, const std::string& question) {
    return phrase_present(payload, question_concept(question)) ? "yes" : "no";
}

// --- normalization ----------------------------------------------------------

Outcome normalize_yes_no(const std::string& raw) {
    std::string first_token;
    for (char c : raw) {
        const unsigned char uc = static_cast<unsigned char>(c);
        if (std::isalnum(uc)) {
            first_token.push_back(static_cast<char>(std::tolower(uc)));
        } else if (!first_token.empty()) {
            break;  // token ended at punctuation/whitespace
        }
    }
    if (first_token == "yes") return Outcome::present;
    if (first_token == "no") return Outcome::absent;
    return Outcome::indeterminate;
}

std::string question_concept(const std::string& question) {
    static const std::string kPrefix = "Is there a ";
    static const std::string kSuffix = " in the image?";
    if (!starts_with_ci(question, "is there a")) {
        throw BackendError("unrecognized question template: '" + question + "'");
    }
    std::string body = question.substr(kPrefix.size());
    if (starts_with_ci(question, "is there an ")) body = question.substr(kPrefix.size() + 1);
    if (body.size() < kSuffix.size() || body.substr(body.size() - kSuffix.size()) != kSuffix) {
        throw BackendError("unrecognized question template: '" + question + "'");
    }
    body.resize(body.size() - kSuffix.size());
    if (body.empty()) throw BackendError("question names no concept: '" + question + "'");
    return body;
}

// --- probes -----------------------------------------------------------------

Probe make_classify_probe(const std::string& concept_phrase,
                          const std::vector<std::string>& alternatives) {
    if (concept_phrase.empty()) throw ContractError("classify probe needs a concept phrase");
    Probe probe;
    probe.mode = ProbeMode::classify;
    probe.concept_phrase = concept_phrase;
    probe.labels.push_back(concept_phrase);
    for (const auto& label : alternatives) {
        if (label == concept_phrase) continue;
        if (std::find(probe.labels.begin(), probe.labels.end(), label) != probe.labels.end()) {
            continue;
        }
        probe.labels.push_back(label);
    }
    if (probe.labels.size() < 2) {
        throw ContractError("classify probe for '" + concept_phrase +
                            "' needs at least one distinct alternative label");
    }
    return probe;
}

Probe make_vqa_probe(const std::string& concept_phrase) {
    Probe probe;
    probe.mode = ProbeMode::vqa;
    probe.concept_phrase = concept_phrase;
    probe.question = render_question(concept_phrase);
    return probe;
}

// --- bank -------------------------------------------------------------------

void VerifierBank::register_backend(std::shared_ptr<VerifierBackend> backend) {
    if (!backend) throw ContractError("cannot register a null verifier");
    const std::string id = backend->id();
    if (backends_.count(id)) throw ConfigError("verifier '" + id + "' is already registered");
    backends_[id] = std::move(backend);
}

bool VerifierBank::has(const std::string& verifier_id) const {
    return backends_.count(verifier_id) > 0;
}

std::vector<std::string> VerifierBank::verifier_ids() const {
    std::vector<std::string> ids;
    for (const auto& [id, backend] : backends_) ids.push_back(id);
    return ids;
}

std::shared_ptr<VerifierBackend> VerifierBank::backend_ptr(const std::string& verifier_id) const {
    auto it = backends_.find(verifier_id);
    if (it == backends_.end()) {
        throw LookupError("no verifier '" + verifier_id + "' registered (have: " +
                          join(verifier_ids(), ", ") + ")");
    }
    return it->second;
}

VerifierBackend& VerifierBank::backend(const std::string& verifier_id) const {
    return *backend_ptr(verifier_id);
}

namespace {

std::string cache_key(const std::string& payload, const std::string& verifier_id,
                      const std::string& version, const std::string& probe_blob) {
    std::string blob = fnv1a64_hex(payload);  // payload digest
    blob += '\x1f';
    blob += verifier_id;
    blob += '\x1f';
    blob += version;
    blob += '\x1f';
    blob += probe_blob;
    return blob;
}

}  // namespace

ClassifyResult VerifierBank::classify(const ImageRecord& image,
                                      const std::vector<std::string>& labels,
                                      const std::string& verifier_id) {
    std::vector<std::string> distinct;
    for (const auto& label : labels) {
        if (std::find(distinct.begin(), distinct.end(), label) == distinct.end()) {
            distinct.push_back(label);
        }
    }
    if (distinct.size() < 2) {
        throw ContractError("classification needs at least 2 distinct labels, got " +
                            std::to_string(distinct.size()));
    }
    auto backend = backend_ptr(verifier_id);

    const std::string key =
        cache_key(image.payload, verifier_id, backend->version(), "classify\x1f" + join(labels, "\x1f"));
    {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = classify_cache_.find(key);
        if (it != classify_cache_.end()) {
            ++hits_;
            return it->second;
        }
    }

    std::vector<double> scores;
    try {
        scores = backend->classify_scores(image.payload, labels);
    } catch (const BackendError& e) {
        throw BackendError(std::string(e.what()), image.prompt_id, image.seed);
    }
    if (scores.size() != labels.size()) {
        throw BackendError("verifier '" + verifier_id + "' returned " +
                               std::to_string(scores.size()) + " scores for " +
                               std::to_string(labels.size()) + " labels",
                           image.prompt_id, image.seed);
    }

    ClassifyResult result;
    result.labels = labels;
    result.scores = scores;
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i) {
        if (scores[i] > scores[best]) best = i;  // strict: ties keep the earlier label
    }
    result.chosen = labels[best];

    std::lock_guard<std::mutex> lock(mutex_);
    ++misses_;
    classify_cache_[key] = result;
    return result;
}

VerifierVerdict VerifierBank::presence(const ImageRecord& image, const Probe& probe,
                                       const std::string& verifier_id) {
    auto backend = backend_ptr(verifier_id);
    if (probe.concept_phrase.empty()) throw ContractError("probe needs a concept phrase");

    VerifierVerdict verdict;
    verdict.prompt_id = image.prompt_id;
    verdict.seed = image.seed;
    verdict.model_id = image.model_id;
    verdict.verifier_id = verifier_id;
    verdict.probe =
        probe.mode == ProbeMode::classify ? probe.concept_phrase : probe.question;

    if (probe.mode == ProbeMode::classify) {
        if (std::find(probe.labels.begin(), probe.labels.end(), probe.concept_phrase) ==
            probe.labels.end()) {
            throw ContractError("probe concept '" + probe.concept_phrase +
                                "' missing from its own label set");
        }
        const ClassifyResult result = classify(image, probe.labels, verifier_id);
        double probe_score = 0.0;
        for (std::size_t i = 0; i < result.labels.size(); ++i) {
            if (result.labels[i] == probe.concept_phrase) probe_score = result.scores[i];
        }
        // Argmax alone cannot distinguish "probe wins" from "nothing scored";
        // require a positive probe score.
        const bool present = result.chosen == probe.concept_phrase && probe_score > 0.0;
        verdict.outcome = present ? Outcome::present : Outcome::absent;
        verdict.score = probe_score;
        note_outcome(verifier_id, verdict.outcome);
        return verdict;
    }

    if (probe.question.empty()) throw ContractError("vqa probe needs a question");
    const std::string key = cache_key(image.payload, verifier_id, backend->version(),
                                      "vqa\x1f" + probe.question);
    bool cached = false;
    {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = verdict_cache_.find(key);
        if (it != verdict_cache_.end()) {
            ++hits_;
            verdict.outcome = it->second.outcome;
            verdict.score = it->second.score;
            verdict.raw_answer = it->second.raw_answer;
            cached = true;
        }
    }
    if (cached) {
        note_outcome(verifier_id, verdict.outcome);
        return verdict;
    }

    std::string raw;
    try {
        raw = backend->vqa_answer(image.payload, probe.question);
    } catch (const BackendError& e) {
        throw BackendError(std::string(e.what()), image.prompt_id, image.seed);
    }
    verdict.raw_answer = raw;
    verdict.outcome = normalize_yes_no(raw);
    if (verdict.outcome != Outcome::indeterminate) {
        verdict.score = verdict.outcome == Outcome::present ? 1.0 : 0.0;
    }

    {
        std::lock_guard<std::mutex> lock(mutex_);
        ++misses_;
        verdict_cache_[key] = Cached{verdict.outcome, verdict.score, verdict.raw_answer};
    }
    note_outcome(verifier_id, verdict.outcome);
    return verdict;
}

VerifierVerdict VerifierBank::vqa_presence(const ImageRecord& image, const std::string& question,
                                           const std::string& verifier_id) {
    Probe probe;
    probe.mode = ProbeMode::vqa;
    probe.concept_phrase = question_concept(question);
    probe.question = question;
    return presence(image, probe, verifier_id);
}

// Callers must not hold mutex_.
void VerifierBank::note_outcome(const std::string& verifier_id, Outcome outcome) {
    if (outcome == Outcome::indeterminate) {
        std::lock_guard<std::mutex> lock(mutex_);
        indeterminate_[verifier_id] += 1;
    }
}

std::size_t VerifierBank::cache_hits() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return hits_;
}

std::size_t VerifierBank::cache_misses() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return misses_;
}

std::map<std::string, std::size_t> VerifierBank::indeterminate_tally() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return indeterminate_;
}

}  // namespace see
