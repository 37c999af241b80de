#include "see/catalog.hpp"

#include <deque>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "see/util.hpp"

namespace see {

namespace {

constexpr std::size_t kExpectedSuperclasses = 11;
constexpr std::size_t kExpectedObjects = 79;

std::string render_variant_name(const std::string& object_name, const AttributeMap& attrs) {
    auto words = attribute_values_in_order(attrs);
    words.push_back(object_name);
    return join(words, " ");
}

}  // namespace

std::string to_string(Level level) {
    switch (level) {
        case Level::superclass: return "superclass";
        case Level::object: return "object";
        case Level::variant: return "variant";
    }
    throw InvariantError("unreachable level");
}

Level level_from_string(const std::string& text) {
    if (text == "superclass") return Level::superclass;
    if (text == "object") return Level::object;
    if (text == "variant") return Level::variant;
    throw ConfigError("unknown level: " + text);
}

const ConceptNode& ConceptTree::node(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw LookupError("unknown concept id: " + id);
    return nodes_[it->second];
}

const std::vector<std::string>& ConceptTree::children(const std::string& id) const {
    if (!contains(id)) throw LookupError("unknown concept id: " + id);
    auto it = child_index_.find(id);
    return it == child_index_.end() ? no_children_ : it->second;
}

const ConceptNode& ConceptTree::find_by_name(const std::string& name) const {
    auto it = name_index_.find(name);
    if (it == name_index_.end()) throw LookupError("no concept named: " + name);
    return nodes_[it->second];
}

void ConceptTree::add_node(ConceptNode node) {
    if (index_.count(node.id)) throw ContractError("duplicate concept id: " + node.id);
    index_.emplace(node.id, nodes_.size());
    if (node.parent_id) child_index_[*node.parent_id].push_back(node.id);
    switch (node.level) {
        case Level::superclass: superclass_ids_.push_back(node.id); break;
        case Level::object: object_ids_.push_back(node.id); break;
        case Level::variant: break;
    }
    nodes_.push_back(std::move(node));
}

void ConceptTree::reindex_names() {
    name_index_.clear();
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        // For duplicate names the shallower node wins (none exist in the
        // benchmark table, but parsed catalogs are not trusted).
        name_index_.emplace(nodes_[i].name, i);
    }
}

ConceptTree build_catalog(const SuperclassTable& table, const AttributeVocabulary& vocab) {
    vocab.validate();
    if (table.size() != kExpectedSuperclasses) {
        throw ConfigError("superclass table must list exactly 11 superclasses, got " +
                          std::to_string(table.size()));
    }

    std::set<std::string> seen_objects;
    std::size_t object_count = 0;
    for (const auto& [superclass, objects] : table) {
        if (objects.empty()) throw ConfigError("superclass has no objects: " + superclass);
        for (const auto& name : objects) {
            if (!seen_objects.insert(name).second) {
                throw ConfigError("duplicate object name: " + name);
            }
        }
        object_count += objects.size();
    }
    if (object_count != kExpectedObjects) {
        throw ConfigError("superclass table must cover exactly 79 objects, got " +
                          std::to_string(object_count));
    }

    const auto combos = enumerate_attribute_combos(vocab);  // 64, empty map first

    ConceptTree tree;
    for (const auto& [superclass, objects] : table) {
        ConceptNode super;
        super.id = slugify(superclass);
        super.name = superclass;
        super.level = Level::superclass;
        tree.add_node(super);

        for (const auto& object_name : objects) {
            ConceptNode object;
            object.id = super.id + "/" + slugify(object_name);
            object.name = object_name;
            object.level = Level::object;
            object.parent_id = super.id;
            tree.add_node(object);

            for (const auto& attrs : combos) {
                if (attrs.empty()) continue;  // the bare object is the node above
                ConceptNode variant;
                variant.id = object.id + "/" + attribute_slug(attrs);
                variant.name = render_variant_name(object_name, attrs);
                variant.level = Level::variant;
                variant.parent_id = object.id;
                variant.attributes = attrs;
                tree.add_node(variant);
            }
        }
    }
    tree.reindex_names();
    return tree;
}

std::vector<ConceptNode> descendants(const ConceptTree& tree, const std::string& id,
                                     std::optional<int> depth) {
    if (depth && *depth < 0) throw ContractError("depth must be non-negative");
    if (depth && *depth == 0) {
        tree.node(id);  // still validate the id
        return {};
    }
    const ConceptNode& root = tree.node(id);

    std::vector<ConceptNode> out;
    std::deque<std::pair<std::string, int>> frontier{{root.id, 0}};
    while (!frontier.empty()) {
        auto [current, level] = frontier.front();
        frontier.pop_front();
        if (depth && level >= *depth) continue;
        for (const auto& child_id : tree.children(current)) {
            out.push_back(tree.node(child_id));
            frontier.emplace_back(child_id, level + 1);
        }
    }
    return out;
}

std::vector<std::string> erase_set(const ConceptTree& tree, const std::string& id) {
    std::vector<std::string> out{tree.node(id).id};
    for (const auto& node : descendants(tree, id)) out.push_back(node.id);
    return out;
}

std::vector<std::string> preserve_set(const ConceptTree& tree, const std::string& id) {
    const auto erased = erase_set(tree, id);
    std::set<std::string> erased_set(erased.begin(), erased.end());
    std::vector<std::string> out;
    out.reserve(tree.size() - erased.size());
    for (const auto& node : tree.nodes()) {
        if (!erased_set.count(node.id)) out.push_back(node.id);
    }
    return out;
}

void serialize_catalog(const ConceptTree& tree, std::ostream& out) {
    for (const auto& node : tree.nodes()) {
        nlohmann::json line{{"id", node.id}, {"name", node.name}, {"level", to_string(node.level)}};
        if (node.parent_id) line["parent_id"] = *node.parent_id;
        line["attributes"] = node.attributes;
        out << line.dump() << '\n';
    }
}

ConceptTree parse_catalog(std::istream& in) {
    ConceptTree tree;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto parsed = nlohmann::json::parse(line);
        ConceptNode node;
        node.id = parsed.at("id").get<std::string>();
        node.name = parsed.at("name").get<std::string>();
        node.level = level_from_string(parsed.at("level").get<std::string>());
        if (parsed.contains("parent_id")) node.parent_id = parsed["parent_id"].get<std::string>();
        if (parsed.contains("attributes")) node.attributes = parsed["attributes"].get<AttributeMap>();
        tree.add_node(std::move(node));
    }
    tree.reindex_names();
    return tree;
}

std::string catalog_digest(const ConceptTree& tree) {
    std::ostringstream buffer;
    serialize_catalog(tree, buffer);
    return fnv1a64_hex(buffer.str());
}

}  // namespace see
