#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "see/vocab.hpp"

namespace see {

enum class Level { superclass, object, variant };

std::string to_string(Level level);
Level level_from_string(const std::string& text);

/// One node of the three-level concept hierarchy.
struct ConceptNode {
    std::string id;                       // "kitchen/cup/small-red-wooden"
    std::string name;                     // "small red wooden cup"
    Level level = Level::object;
    std::optional<std::string> parent_id; // absent for superclasses
    AttributeMap attributes;              // non-empty only for variants
};

/// Ordered superclass table: (superclass name, object names) pairs. The order
/// here fixes the canonical node order everywhere downstream.
using SuperclassTable = std::vector<std::pair<std::string, std::vector<std::string>>>;

/// Immutable after construction; unrestricted concurrent reads are safe.
class ConceptTree {
public:
    const std::vector<ConceptNode>& nodes() const { return nodes_; }
    const ConceptNode& node(const std::string& id) const;
    bool contains(const std::string& id) const { return index_.count(id) > 0; }

    // Direct children, in canonical order. Empty for leaves.
    const std::vector<std::string>& children(const std::string& id) const;

    // Superclass ids in canonical order.
    const std::vector<std::string>& superclass_ids() const { return superclass_ids_; }
    // Object ids in canonical order (grouped by superclass).
    const std::vector<std::string>& object_ids() const { return object_ids_; }

    std::size_t size() const { return nodes_.size(); }

    // Object node id for a bare object name ("cup" -> "kitchen/cup"), or any
    // node whose name matches exactly. Throws LookupError if absent.
    const ConceptNode& find_by_name(const std::string& name) const;

private:
    friend ConceptTree build_catalog(const SuperclassTable&, const AttributeVocabulary&);
    friend ConceptTree parse_catalog(std::istream&);

    void add_node(ConceptNode node);
    void reindex_names();

    std::vector<ConceptNode> nodes_;
    std::unordered_map<std::string, std::size_t> index_;
    std::unordered_map<std::string, std::vector<std::string>> child_index_;
    std::unordered_map<std::string, std::size_t> name_index_;
    std::vector<std::string> superclass_ids_;
    std::vector<std::string> object_ids_;
    std::vector<std::string> no_children_;
};

// Builds the full hierarchy: superclasses from the table, one object node per
// listed name, and the 63 attribute variants per object in canonical order.
// Rejects duplicate object names, empty superclasses, and tables that do not
// describe the expected 11-superclass / 79-object benchmark shape.
ConceptTree build_catalog(const SuperclassTable& table, const AttributeVocabulary& vocab);

// Breadth-first descendants of `id`, truncated at `depth` levels below it
// (nullopt = unlimited). Deterministic order.
std::vector<ConceptNode> descendants(const ConceptTree& tree, const std::string& id,
                                     std::optional<int> depth = std::nullopt);

// The target plus all of its descendants, in deterministic (self-first,
// breadth-first) order.
std::vector<std::string> erase_set(const ConceptTree& tree, const std::string& id);

// Every node id not in erase_set(tree, id), in canonical tree order.
std::vector<std::string> preserve_set(const ConceptTree& tree, const std::string& id);

// Catalog serialization: JSON lines, one node per line, fields
// id/name/level/parent_id/attributes; canonical node order.
void serialize_catalog(const ConceptTree& tree, std::ostream& out);
ConceptTree parse_catalog(std::istream& in);
std::string catalog_digest(const ConceptTree& tree);

}  // namespace see
