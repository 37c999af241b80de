#include "see/prompts.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "see/util.hpp"

namespace see {

namespace {

// Words whose spelling and pronunciation disagree for a/an. None occur in the
// benchmark vocabulary; kept so the heuristic stays safe on user phrases.
const std::map<std::string, std::string>& article_exceptions() {
    static const std::map<std::string, std::string> exceptions{
        {"hour", "an"},   {"honest", "an"}, {"heir", "an"},       {"honor", "an"},
        {"one", "a"},     {"once", "a"},    {"user", "a"},        {"unicorn", "a"},
        {"university", "a"}, {"european", "a"}, {"uniform", "a"},
    };
    return exceptions;
}

void to_json_line(const PromptRecord& record, std::ostream& out) {
    nlohmann::json line{{"prompt_id", record.prompt_id}, {"object_id", record.object_id},
                        {"superclass", record.superclass}, {"attributes", record.attributes},
                        {"text", record.text},             {"question", record.question},
                        {"class_label", record.class_label}};
    out << line.dump() << '\n';
}

}  // namespace

std::string render_class_label(const AttributeMap& attrs, const std::string& object_name) {
    auto words = attribute_values_in_order(attrs);
    words.push_back(object_name);
    return join(words, " ");
}

std::string render_prompt_text(const AttributeMap& attrs, const std::string& object_name) {
    return "An image of a " + render_class_label(attrs, object_name);
}

std::string render_question(const std::string& concept_phrase) {
    if (concept_phrase.empty()) throw ContractError("question concept phrase must be non-empty");
    return "Is there a " + concept_phrase + " in the image?";
}

std::string indefinite_article(const std::string& following_word) {
    if (following_word.empty()) throw ContractError("article requires a following word");
    const std::string lower = to_lower(following_word);
    auto it = article_exceptions().find(lower);
    if (it != article_exceptions().end()) return it->second;
    switch (lower.front()) {
        case 'a': case 'e': case 'i': case 'o': case 'u': return "an";
        default: return "a";
    }
}

std::string render_leakage_prompt(const std::string& attribute, const std::string& erase_phrase,
                                  const std::string& preserve_phrase,
                                  const AttributeVocabulary& vocab) {
    if (!vocab.contains(attribute)) {
        throw ContractError("attribute not in vocabulary: " + attribute);
    }
    if (erase_phrase == preserve_phrase) {
        throw ContractError("erase and preserve phrases must differ: " + erase_phrase);
    }
    if (erase_phrase.empty() || preserve_phrase.empty()) {
        throw ContractError("leakage phrases must be non-empty");
    }
    const auto preserve_words = split_words(preserve_phrase);
    return "an image of " + indefinite_article(attribute) + " " + attribute + " " + erase_phrase +
           " and " + indefinite_article(preserve_words.front()) + " " + preserve_phrase;
}

std::vector<PromptRecord> enumerate_variants(const ConceptTree& tree, const ConceptNode& object_node,
                                             const AttributeVocabulary& vocab) {
    if (object_node.level != Level::object) {
        throw ContractError("enumerate_variants requires an object node, got " +
                            to_string(object_node.level) + " '" + object_node.id + "'");
    }
    const std::string superclass = tree.node(*object_node.parent_id).name;

    std::vector<PromptRecord> records;
    records.reserve(64);
    for (const auto& attrs : enumerate_attribute_combos(vocab)) {
        PromptRecord record;
        record.object_id = object_node.id;
        record.superclass = superclass;
        record.attributes = attrs;
        record.prompt_id =
            attrs.empty() ? object_node.id : object_node.id + "/" + attribute_slug(attrs);
        record.class_label = render_class_label(attrs, object_node.name);
        record.text = render_prompt_text(attrs, object_node.name);
        record.question = render_question(record.class_label);
        records.push_back(std::move(record));
    }
    return records;
}

std::vector<PromptRecord> build_corpus(const ConceptTree& tree, const AttributeVocabulary& vocab) {
    std::vector<PromptRecord> corpus;
    corpus.reserve(tree.object_ids().size() * 64);
    for (const auto& object_id : tree.object_ids()) {
        auto family = enumerate_variants(tree, tree.node(object_id), vocab);
        corpus.insert(corpus.end(), std::make_move_iterator(family.begin()),
                      std::make_move_iterator(family.end()));
    }
    return corpus;
}

ConceptLexicon::ConceptLexicon(const ConceptTree& tree, AttributeVocabulary vocab)
    : vocab_(std::move(vocab)) {
    for (const auto& id : tree.superclass_ids()) superclasses_.insert(tree.node(id).name);
    for (const auto& id : tree.object_ids()) {
        const auto& node = tree.node(id);
        object_superclass_.emplace(node.name, tree.node(*node.parent_id).name);
        object_names_.push_back(node.name);
    }
}

std::string ConceptLexicon::superclass_of(const std::string& object_name) const {
    auto it = object_superclass_.find(object_name);
    return it == object_superclass_.end() ? std::string{} : it->second;
}

ParsedConcept parse_concept_phrase(const std::string& phrase, const ConceptLexicon& lexicon) {
    const auto words = split_words(phrase);
    ParsedConcept parsed;
    std::size_t i = 0;
    for (; i < words.size(); ++i) {
        auto slot = lexicon.vocab().slot_of(words[i]);
        if (!slot || parsed.attributes.count(*slot)) break;
        parsed.attributes[*slot] = words[i];
    }
    std::vector<std::string> rest(words.begin() + static_cast<std::ptrdiff_t>(i), words.end());
    parsed.object = join(rest, " ");
    if (parsed.object.empty()) {
        throw ContractError("concept phrase has no object: '" + phrase + "'");
    }
    if (!lexicon.is_object(parsed.object) && !lexicon.is_superclass(parsed.object)) {
        throw ContractError("unknown concept '" + parsed.object + "' in phrase '" + phrase + "'");
    }
    return parsed;
}

std::vector<ParsedConcept> parse_prompt_text(const std::string& text, const ConceptLexicon& lexicon) {
    std::string body = text;
    if (starts_with_ci(body, "an image of ")) body = body.substr(std::string("an image of ").size());

    // The two-object leakage template joins mentions with " and ".
    std::vector<std::string> segments;
    std::size_t start = 0;
    while (true) {
        auto pos = body.find(" and ", start);
        if (pos == std::string::npos) {
            segments.push_back(body.substr(start));
            break;
        }
        segments.push_back(body.substr(start, pos - start));
        start = pos + 5;
    }

    std::vector<ParsedConcept> concepts;
    for (auto& segment : segments) {
        if (starts_with_ci(segment, "an ")) segment = segment.substr(3);
        else if (starts_with_ci(segment, "a ")) segment = segment.substr(2);
        concepts.push_back(parse_concept_phrase(segment, lexicon));
    }
    return concepts;
}

void write_corpus(const std::vector<PromptRecord>& corpus, std::ostream& out) {
    std::vector<const PromptRecord*> sorted;
    sorted.reserve(corpus.size());
    for (const auto& record : corpus) sorted.push_back(&record);
    std::sort(sorted.begin(), sorted.end(),
              [](const PromptRecord* a, const PromptRecord* b) { return a->prompt_id < b->prompt_id; });
    for (const auto* record : sorted) to_json_line(*record, out);
}

std::vector<PromptRecord> read_corpus(std::istream& in) {
    std::vector<PromptRecord> corpus;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto parsed = nlohmann::json::parse(line);
        PromptRecord record;
        record.prompt_id = parsed.at("prompt_id").get<std::string>();
        record.object_id = parsed.at("object_id").get<std::string>();
        record.superclass = parsed.at("superclass").get<std::string>();
        record.attributes = parsed.at("attributes").get<AttributeMap>();
        record.text = parsed.at("text").get<std::string>();
        record.question = parsed.at("question").get<std::string>();
        record.class_label = parsed.at("class_label").get<std::string>();
        corpus.push_back(std::move(record));
    }
    return corpus;
}

std::string corpus_digest(const std::vector<PromptRecord>& corpus) {
    std::ostringstream buffer;
    write_corpus(corpus, buffer);
    return fnv1a64_hex(buffer.str());
}

std::string corpus_manifest_json(const ConceptTree& tree, const AttributeVocabulary& vocab,
                                 const std::vector<PromptRecord>& corpus) {
    nlohmann::json manifest{
        {"generator_version", kGeneratorVersion},
        {"vocabulary",
         {{"size", vocab.size}, {"color", vocab.color}, {"material", vocab.material}}},
        {"tree_digest", catalog_digest(tree)},
        {"corpus_digest", corpus_digest(corpus)},
        {"records", corpus.size()},
    };
    return manifest.dump(2) + "\n";
}

}  // namespace see
