#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>

#include "relooper/strings.hpp"

namespace relooper::textworld {

// Identifiers render as "{class_name} {index}", e.g. "pillow 2" or "fridge 1".
// Class names are single lowercase words; indices are positive.

struct ObjectId {
    std::string class_name;
    int index = 1;

    auto operator<=>(const ObjectId&) const = default;
    std::string str() const { return class_name + " " + std::to_string(index); }
};

struct ReceptacleId {
    std::string class_name;
    int index = 1;

    auto operator<=>(const ReceptacleId&) const = default;
    std::string str() const { return class_name + " " + std::to_string(index); }
};

namespace detail_id {

inline bool parse_pair(std::string_view text, std::string& class_name, int& index) {
    const auto words = relooper::detail::split_words(text);
    if (words.size() != 2) return false;
    if (!relooper::detail::is_lower_alpha_word(words[0])) return false;
    int idx = 0;
    if (!relooper::detail::parse_positive_int(words[1], idx)) return false;
    class_name = words[0];
    index = idx;
    return true;
}

}  // namespace detail_id

inline std::optional<ObjectId> parse_object_id(std::string_view text) {
    ObjectId id;
    if (!detail_id::parse_pair(text, id.class_name, id.index)) return std::nullopt;
    return id;
}

inline std::optional<ReceptacleId> parse_receptacle_id(std::string_view text) {
    ReceptacleId id;
    if (!detail_id::parse_pair(text, id.class_name, id.index)) return std::nullopt;
    return id;
}

}  // namespace relooper::textworld
