#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace see {

// Attribute slots in template order: size before color before material.
inline constexpr std::array<const char*, 3> kSlotOrder{"size", "color", "material"};

// slot name -> value, only filled slots present.
using AttributeMap = std::map<std::string, std::string>;

/// The three-slot attribute vocabulary used to compose variant prompts.
struct AttributeVocabulary {
    std::vector<std::string> size{"small", "medium", "large"};
    std::vector<std::string> color{"red", "green", "blue"};
    std::vector<std::string> material{"wooden", "rubber", "metallic"};

    const std::vector<std::string>& values(const std::string& slot) const;

    // slot name, or nullopt if the word is not a vocabulary value.
    std::optional<std::string> slot_of(const std::string& value) const;

    bool contains(const std::string& value) const { return slot_of(value).has_value(); }

    // Throws ConfigError unless every slot has exactly 3 distinct lowercase
    // hyphen-free values.
    void validate() const;
};

// All 64 attribute combinations (including the empty map) in canonical order:
// grouped by arity ascending, within an arity ordered lexicographically by
// value rank (size values first, then color, then material, each in
// vocabulary order). This order is what keeps prompt ids stable across runs.
std::vector<AttributeMap> enumerate_attribute_combos(const AttributeVocabulary& vocab);

// Filled values in slot order, e.g. {"small", "wooden"}.
std::vector<std::string> attribute_values_in_order(const AttributeMap& attrs);

// "small-red-wooden" (empty slots omitted); "" for the empty map.
std::string attribute_slug(const AttributeMap& attrs);

}  // namespace see
