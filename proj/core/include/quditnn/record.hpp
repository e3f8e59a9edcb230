#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "quditnn/linalg.hpp"

namespace quditnn {

/// Versioned plain-text container used for every saved model.
///
///     quditnn-record <version>
///     kind <kind>
///     field <key> <value...>
///     matrix <name> <rows> <cols>
///     <row-major values, one row per line, C99 hex-float>
///     end
///
/// Hex-float encoding makes the round trip bit-exact.
struct Record {
    static constexpr int kFormatVersion = 1;

    std::string kind;
    int version = kFormatVersion;
    std::vector<std::pair<std::string, std::string>> fields;
    std::vector<std::pair<std::string, RealMatrix>> matrices;

    void set(std::string key, std::string value);
    void set_matrix(std::string name, RealMatrix m);

    std::optional<std::string> find(const std::string &key) const;
    /// Throws ParseError when the key is missing.
    const std::string &get(const std::string &key) const;
    const RealMatrix &matrix(const std::string &name) const;
};

void write_record(std::ostream &out, const Record &rec);

/// Throws ParseError on malformed input or unsupported version.
Record read_record(std::istream &in);

void save_record(const std::string &path, const Record &rec);
Record load_record(const std::string &path);

std::string format_hex(double v);
double parse_double(const std::string &token);

} // namespace quditnn
