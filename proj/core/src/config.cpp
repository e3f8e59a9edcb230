#include "quditnn/config.hpp"

#include <charconv>
#include <fstream>
#include <istream>

#include "quditnn/errors.hpp"
#include "quditnn/record.hpp"

namespace quditnn {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::uint64_t parse_uint(std::string_view text) {
    const std::string t = trim(text);
    std::uint64_t v = 0;
    const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc{} || end != t.data() + t.size()) {
        throw ParseError("'" + t + "' is not a non-negative integer");
    }
    return v;
}

} // namespace

std::vector<std::uint64_t> parse_uint_list(std::string_view text) {
    const std::string t = trim(text);
    std::vector<std::uint64_t> out;
    if (const auto dots = t.find(".."); dots != std::string::npos) {
        const auto lo = parse_uint(std::string_view(t).substr(0, dots));
        const auto hi = parse_uint(std::string_view(t).substr(dots + 2));
        if (hi < lo) {
            throw ParseError("range '" + t + "' is empty");
        }
        for (auto v = lo; v <= hi; ++v) {
            out.push_back(v);
        }
        return out;
    }
    std::size_t start = 0;
    while (start <= t.size()) {
        const auto comma = t.find(',', start);
        const auto end = comma == std::string::npos ? t.size() : comma;
        out.push_back(parse_uint(std::string_view(t).substr(start, end - start)));
        if (comma == std::string::npos) {
            break;
        }
        start = comma + 1;
    }
    return out;
}

ConfigDocument ConfigDocument::parse(std::istream &in, const std::string &source) {
    ConfigDocument doc;
    doc.source_ = source;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') {
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw ParseError(source + ":" + std::to_string(line_no) + ": expected 'key = value'");
        }
        const std::string key = trim(std::string_view(t).substr(0, eq));
        const std::string value = trim(std::string_view(t).substr(eq + 1));
        if (key.empty()) {
            throw ParseError(source + ":" + std::to_string(line_no) + ": empty key");
        }
        if (!doc.values_.emplace(key, value).second) {
            throw ParseError(source + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'");
        }
    }
    return doc;
}

ConfigDocument ConfigDocument::load(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open config '" + path + "'");
    }
    return parse(in, path);
}

void ConfigDocument::set(const std::string &key, const std::string &value) { values_[key] = value; }

std::optional<std::string> ConfigDocument::take_string(const std::string &key) {
    const auto it = values_.find(key);
    if (it == values_.end()) {
        return std::nullopt;
    }
    used_.insert(key);
    return it->second;
}

std::optional<double> ConfigDocument::take_double(const std::string &key) {
    const auto s = take_string(key);
    if (!s) {
        return std::nullopt;
    }
    try {
        return parse_double(*s);
    } catch (const ParseError &) {
        throw ParseError(source_ + ": '" + key + "' must be a number, got '" + *s + "'");
    }
}

std::optional<std::int64_t> ConfigDocument::take_int(const std::string &key) {
    const auto s = take_string(key);
    if (!s) {
        return std::nullopt;
    }
    std::int64_t v = 0;
    const auto [end, ec] = std::from_chars(s->data(), s->data() + s->size(), v);
    if (s->empty() || ec != std::errc{} || end != s->data() + s->size()) {
        throw ParseError(source_ + ": '" + key + "' must be an integer, got '" + *s + "'");
    }
    return v;
}

std::optional<std::uint64_t> ConfigDocument::take_uint(const std::string &key) {
    const auto s = take_string(key);
    if (!s) {
        return std::nullopt;
    }
    try {
        return parse_uint(*s);
    } catch (const ParseError &) {
        throw ParseError(source_ + ": '" + key + "' must be a non-negative integer, got '" + *s + "'");
    }
}

std::optional<bool> ConfigDocument::take_bool(const std::string &key) {
    const auto s = take_string(key);
    if (!s) {
        return std::nullopt;
    }
    if (*s == "on" || *s == "true" || *s == "1" || *s == "yes") {
        return true;
    }
    if (*s == "off" || *s == "false" || *s == "0" || *s == "no") {
        return false;
    }
    throw ParseError(source_ + ": '" + key + "' must be on|off, got '" + *s + "'");
}

std::optional<std::vector<std::uint64_t>> ConfigDocument::take_uint_list(const std::string &key) {
    const auto s = take_string(key);
    if (!s) {
        return std::nullopt;
    }
    try {
        return parse_uint_list(*s);
    } catch (const ParseError &e) {
        throw ParseError(source_ + ": '" + key + "': " + e.what());
    }
}

void ConfigDocument::reject_unused() const {
    std::string unknown;
    for (const auto &[key, value] : values_) {
        if (used_.count(key) == 0) {
            unknown += (unknown.empty() ? "'" : ", '") + key + "'";
        }
    }
    if (!unknown.empty()) {
        throw ParseError(source_ + ": unknown key(s) " + unknown);
    }
}

} // namespace quditnn
