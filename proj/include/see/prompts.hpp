#pragma once

#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "see/catalog.hpp"
#include "see/vocab.hpp"

namespace see {

/// One benchmark corpus entry. prompt_id doubles as the concept node id, so
/// every downstream record joins back to the tree on one key.
struct PromptRecord {
    std::string prompt_id;
    std::string object_id;
    std::string superclass;
    AttributeMap attributes;
    std::string text;         // "An image of a small red wooden car"
    std::string question;     // "Is there a small red wooden car in the image?"
    std::string class_label;  // "small red wooden car"

    bool operator==(const PromptRecord&) const = default;
};

// "small red wooden car" (attribute tokens in slot order, then the object).
std::string render_class_label(const AttributeMap& attrs, const std::string& object_name);

// "An image of a <class label>".
std::string render_prompt_text(const AttributeMap& attrs, const std::string& object_name);

// "Is there a <concept> in the image?". Rejects empty phrases.
std::string render_question(const std::string& concept_phrase);

// "an image of a/an <attribute> <e> and a/an <p>", articles chosen by the
// initial-vowel heuristic on the word that follows. Rejects e == p and
// attributes outside the vocabulary.
std::string render_leakage_prompt(const std::string& attribute, const std::string& erase_phrase,
                                  const std::string& preserve_phrase,
                                  const AttributeVocabulary& vocab = AttributeVocabulary{});

// "a" or "an" for the given following word.
std::string indefinite_article(const std::string& following_word);

// The 64 records of one object family: 1 bare + 9 one-attribute +
// 27 two-attribute + 27 three-attribute, in canonical order.
std::vector<PromptRecord> enumerate_variants(const ConceptTree& tree, const ConceptNode& object_node,
                                             const AttributeVocabulary& vocab);

// The full benchmark corpus: 64 records for each of the 79 objects, objects
// in canonical tree order.
std::vector<PromptRecord> build_corpus(const ConceptTree& tree, const AttributeVocabulary& vocab);

// --- concept phrase parsing -------------------------------------------------

/// Name lookup used when parsing free prompt text back into concepts.
class ConceptLexicon {
public:
    ConceptLexicon(const ConceptTree& tree, AttributeVocabulary vocab);

    bool is_object(const std::string& name) const { return object_superclass_.count(name) > 0; }
    bool is_superclass(const std::string& name) const { return superclasses_.count(name) > 0; }
    // Superclass name of an object, or "" when unknown.
    std::string superclass_of(const std::string& object_name) const;
    const AttributeVocabulary& vocab() const { return vocab_; }
    const std::vector<std::string>& object_names() const { return object_names_; }

private:
    std::map<std::string, std::string> object_superclass_;
    std::set<std::string> superclasses_;
    std::vector<std::string> object_names_;
    AttributeVocabulary vocab_;
};

/// A parsed concept mention: the object (or superclass) phrase plus any
/// attribute values peeled off the front.
struct ParsedConcept {
    std::string object;  // "car", "wine glass", or a superclass like "vehicle"
    AttributeMap attributes;

    bool operator==(const ParsedConcept&) const = default;
};

// "small red wooden car" -> {car, {size: small, color: red, material: wooden}}.
ParsedConcept parse_concept_phrase(const std::string& phrase, const ConceptLexicon& lexicon);

// Parses full prompt text ("An image of a ..." or the two-object leakage
// template) into its concept mentions.
std::vector<ParsedConcept> parse_prompt_text(const std::string& text, const ConceptLexicon& lexicon);

// --- corpus persistence -------------------------------------------------

// JSON lines, one record per line, sorted by prompt_id.
void write_corpus(const std::vector<PromptRecord>& corpus, std::ostream& out);
std::vector<PromptRecord> read_corpus(std::istream& in);
std::string corpus_digest(const std::vector<PromptRecord>& corpus);

inline constexpr const char* kGeneratorVersion = "see-corpus-1";

// Sidecar manifest for a written corpus: vocabulary, tree digest, generator
// version, corpus digest and record count.
std::string corpus_manifest_json(const ConceptTree& tree, const AttributeVocabulary& vocab,
                                 const std::vector<PromptRecord>& corpus);

}  // namespace see
