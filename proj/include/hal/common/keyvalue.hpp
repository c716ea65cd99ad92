// File: keyvalue.hpp
// Description: Flat key-value text format with dotted sections
//
//   # comment
//   top.level = 3
//   [recipe wood]        -> keys below are prefixed "recipe.wood."
//   inputs = log:1

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hal {

class KeyValues {
public:
    static auto parse(std::string_view text, const std::string& source = "<text>") -> KeyValues;
    static auto load(const std::string& path) -> KeyValues;

    // Later assignments replace earlier ones but keep the original position.
    void set(const std::string& key, std::string value);
    [[nodiscard]] auto find(const std::string& key) const -> std::optional<std::string>;
    [[nodiscard]] auto contains(const std::string& key) const -> bool { return find(key).has_value(); }

    [[nodiscard]] auto get_string(const std::string& key, const std::string& fallback) const -> std::string;
    [[nodiscard]] auto get_int(const std::string& key, std::int64_t fallback) const -> std::int64_t;
    [[nodiscard]] auto get_double(const std::string& key, double fallback) const -> double;
    [[nodiscard]] auto get_bool(const std::string& key, bool fallback) const -> bool;

    // Keys below `prefix.` (without the prefix), in file order.
    [[nodiscard]] auto section(const std::string& prefix) const -> KeyValues;
    // Distinct first components of keys below `prefix.`.
    [[nodiscard]] auto children(const std::string& prefix) const -> std::vector<std::string>;

    [[nodiscard]] auto entries() const -> const std::vector<std::pair<std::string, std::string>>& { return entries_; }
    [[nodiscard]] auto to_text() const -> std::string;

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

auto trim(std::string_view s) -> std::string_view;
auto split(std::string_view s, char sep) -> std::vector<std::string>;

}    // namespace hal
