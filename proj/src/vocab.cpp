#include "see/vocab.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "see/util.hpp"

namespace see {

const std::vector<std::string>& AttributeVocabulary::values(const std::string& slot) const {
    if (slot == "size") return size;
    if (slot == "color") return color;
    if (slot == "material") return material;
    throw LookupError("unknown attribute slot: " + slot);
}

std::optional<std::string> AttributeVocabulary::slot_of(const std::string& value) const {
    for (const char* slot : kSlotOrder) {
        const auto& vals = values(slot);
        if (std::find(vals.begin(), vals.end(), value) != vals.end()) return std::string(slot);
    }
    return std::nullopt;
}

void AttributeVocabulary::validate() const {
    std::set<std::string> seen;  // across slots: duplicates make parsing ambiguous
    for (const char* slot : kSlotOrder) {
        const auto& vals = values(slot);
        if (vals.size() != 3) {
            throw ConfigError(std::string("attribute slot '") + slot + "' must have exactly 3 values");
        }
        for (const auto& v : vals) {
            if (v.empty()) throw ConfigError(std::string("empty value in slot '") + slot + "'");
            for (char c : v) {
                if (std::isupper(static_cast<unsigned char>(c)) || c == '-') {
                    throw ConfigError("attribute value must be lowercase and hyphen-free: " + v);
                }
            }
            if (!seen.insert(v).second) {
                throw ConfigError("duplicate attribute value: " + v);
            }
        }
    }
}

std::vector<AttributeMap> enumerate_attribute_combos(const AttributeVocabulary& vocab) {
    vocab.validate();

    // Global value rank: size values 0..2, color 3..5, material 6..8.
    struct Combo {
        AttributeMap attrs;
        std::vector<int> ranks;  // ranks of filled values in slot order
    };
    std::vector<Combo> combos;
    combos.reserve(64);

    const std::array<const std::vector<std::string>*, 3> slot_values{&vocab.size, &vocab.color,
                                                                     &vocab.material};
    for (int s = -1; s < 3; ++s) {
        for (int c = -1; c < 3; ++c) {
            for (int m = -1; m < 3; ++m) {
                Combo combo;
                const std::array<int, 3> idx{s, c, m};
                int offset = 0;
                for (int slot = 0; slot < 3; ++slot) {
                    if (idx[slot] >= 0) {
                        combo.attrs[kSlotOrder[slot]] = (*slot_values[slot])[idx[slot]];
                        combo.ranks.push_back(offset + idx[slot]);
                    }
                    offset += static_cast<int>(slot_values[slot]->size());
                }
                combos.push_back(std::move(combo));
            }
        }
    }

    std::stable_sort(combos.begin(), combos.end(), [](const Combo& a, const Combo& b) {
        if (a.ranks.size() != b.ranks.size()) return a.ranks.size() < b.ranks.size();
        return a.ranks < b.ranks;
    });

    std::vector<AttributeMap> out;
    out.reserve(combos.size());
    for (auto& combo : combos) out.push_back(std::move(combo.attrs));
    return out;
}

std::vector<std::string> attribute_values_in_order(const AttributeMap& attrs) {
    std::vector<std::string> out;
    for (const char* slot : kSlotOrder) {
        auto it = attrs.find(slot);
        if (it != attrs.end()) out.push_back(it->second);
    }
    return out;
}

std::string attribute_slug(const AttributeMap& attrs) {
    return join(attribute_values_in_order(attrs), "-");
}

}  // namespace see
