#include "hal/common/keyvalue.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "hal/common/error.hpp"

namespace hal {

auto trim(std::string_view s) -> std::string_view {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

auto split(std::string_view s, char sep) -> std::vector<std::string> {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        parts.emplace_back(trim(s.substr(start, pos - start)));
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    return parts;
}

auto KeyValues::parse(std::string_view text, const std::string& source) -> KeyValues {
    KeyValues kv;
    std::string prefix;
    std::size_t line_no = 0;
    std::istringstream lines{std::string(text)};
    std::string raw;
    while (std::getline(lines, raw)) {
        ++line_no;
        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto where = source + ":" + std::to_string(line_no);
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ConfigError(where, "unterminated section header");
            }
            prefix.clear();
            std::istringstream words(std::string(line.substr(1, line.size() - 2)));
            std::string word;
            while (words >> word) {
                prefix += word + ".";
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError(where, "expected 'key = value'");
        }
        const auto key = trim(line.substr(0, eq));
        if (key.empty()) {
            throw ConfigError(where, "empty key");
        }
        kv.set(prefix + std::string(key), std::string(trim(line.substr(eq + 1))));
    }
    return kv;
}

auto KeyValues::load(const std::string& path) -> KeyValues {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(path, "cannot open file");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse(buffer.str(), path);
}

void KeyValues::set(const std::string& key, std::string value) {
    for (auto& [k, v] : entries_) {
        if (k == key) {
            v = std::move(value);
            return;
        }
    }
    entries_.emplace_back(key, std::move(value));
}

auto KeyValues::find(const std::string& key) const -> std::optional<std::string> {
    for (const auto& [k, v] : entries_) {
        if (k == key) {
            return v;
        }
    }
    return std::nullopt;
}

auto KeyValues::get_string(const std::string& key, const std::string& fallback) const -> std::string {
    return find(key).value_or(fallback);
}

auto KeyValues::get_int(const std::string& key, std::int64_t fallback) const -> std::int64_t {
    const auto v = find(key);
    if (!v) {
        return fallback;
    }
    // Accept scientific shorthand such as 1e5 for step counts.
    std::int64_t out = 0;
    const auto* first = v->data();
    const auto* last = v->data() + v->size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec == std::errc() && ptr == last) {
        return out;
    }
    try {
        std::size_t used = 0;
        const double d = std::stod(*v, &used);
        if (used == v->size() && d == static_cast<double>(static_cast<std::int64_t>(d))) {
            return static_cast<std::int64_t>(d);
        }
    } catch (const std::exception&) {
    }
    throw ConfigError(key, "expected an integer, got '" + *v + "'");
}

auto KeyValues::get_double(const std::string& key, double fallback) const -> double {
    const auto v = find(key);
    if (!v) {
        return fallback;
    }
    try {
        std::size_t used = 0;
        // Allow simple fractions like 1/100.
        if (const auto slash = v->find('/'); slash != std::string::npos) {
            const double num = std::stod(v->substr(0, slash));
            const double den = std::stod(v->substr(slash + 1));
            return num / den;
        }
        const double d = std::stod(*v, &used);
        if (used == v->size()) {
            return d;
        }
    } catch (const std::exception&) {
    }
    throw ConfigError(key, "expected a number, got '" + *v + "'");
}

auto KeyValues::get_bool(const std::string& key, bool fallback) const -> bool {
    const auto v = find(key);
    if (!v) {
        return fallback;
    }
    if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") {
        return true;
    }
    if (*v == "false" || *v == "0" || *v == "no" || *v == "off") {
        return false;
    }
    throw ConfigError(key, "expected a boolean, got '" + *v + "'");
}

auto KeyValues::section(const std::string& prefix) const -> KeyValues {
    KeyValues out;
    const auto full = prefix + ".";
    for (const auto& [k, v] : entries_) {
        if (k.rfind(full, 0) == 0) {
            out.entries_.emplace_back(k.substr(full.size()), v);
        }
    }
    return out;
}

auto KeyValues::children(const std::string& prefix) const -> std::vector<std::string> {
    std::vector<std::string> out;
    const auto full = prefix.empty() ? std::string() : prefix + ".";
    for (const auto& [k, v] : entries_) {
        if (k.rfind(full, 0) != 0) {
            continue;
        }
        auto rest = k.substr(full.size());
        auto name = rest.substr(0, rest.find('.'));
        if (std::find(out.begin(), out.end(), name) == out.end()) {
            out.push_back(name);
        }
    }
    return out;
}

auto KeyValues::to_text() const -> std::string {
    std::ostringstream out;
    for (const auto& [k, v] : entries_) {
        out << k << " = " << v << '\n';
    }
    return out.str();
}

}    // namespace hal
