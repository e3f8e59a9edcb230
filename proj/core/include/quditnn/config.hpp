#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace quditnn {

/// Flat `key = value` document. Blank lines and lines starting with '#'
/// are ignored. Keys are tracked as they are read so that leftovers can be
/// rejected as unknown.
class ConfigDocument {
  public:
    /// Throws ParseError on malformed lines and duplicate keys.
    static ConfigDocument parse(std::istream &in, const std::string &source = "<config>");
    static ConfigDocument load(const std::string &path);

    void set(const std::string &key, const std::string &value);
    bool contains(const std::string &key) const { return values_.count(key) != 0; }

    /// Typed accessors mark the key as used. ParseError names the key on a
    /// malformed value.
    std::optional<std::string> take_string(const std::string &key);
    std::optional<double> take_double(const std::string &key);
    std::optional<std::int64_t> take_int(const std::string &key);
    std::optional<std::uint64_t> take_uint(const std::string &key);
    std::optional<bool> take_bool(const std::string &key);
    /// Comma-separated unsigned list, or an inclusive range `a..b`.
    std::optional<std::vector<std::uint64_t>> take_uint_list(const std::string &key);

    /// Throws ParseError listing every key never taken.
    void reject_unused() const;

    const std::map<std::string, std::string> &values() const { return values_; }

  private:
    std::map<std::string, std::string> values_;
    std::set<std::string> used_;
    std::string source_;
};

/// Parses `1,2,5` or `0..9`.
std::vector<std::uint64_t> parse_uint_list(std::string_view text);

} // namespace quditnn
