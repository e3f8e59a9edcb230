#include "quditnn/record.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "quditnn/errors.hpp"

namespace quditnn {

std::string format_hex(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%a", v);
    return buf;
}

double parse_double(const std::string &token) {
    if (token.empty()) {
        throw ParseError("empty numeric token");
    }
    errno = 0;
    char *end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end != token.c_str() + token.size() || errno == ERANGE) {
        throw ParseError("cannot parse '" + token + "' as a number");
    }
    return v;
}

void Record::set(std::string key, std::string value) {
    for (auto &[k, v] : fields) {
        if (k == key) {
            v = std::move(value);
            return;
        }
    }
    fields.emplace_back(std::move(key), std::move(value));
}

void Record::set_matrix(std::string name, RealMatrix m) {
    for (auto &[n, mat] : matrices) {
        if (n == name) {
            mat = std::move(m);
            return;
        }
    }
    matrices.emplace_back(std::move(name), std::move(m));
}

std::optional<std::string> Record::find(const std::string &key) const {
    for (const auto &[k, v] : fields) {
        if (k == key) {
            return v;
        }
    }
    return std::nullopt;
}

const std::string &Record::get(const std::string &key) const {
    for (const auto &[k, v] : fields) {
        if (k == key) {
            return v;
        }
    }
    throw ParseError("record of kind '" + kind + "' has no field '" + key + "'");
}

const RealMatrix &Record::matrix(const std::string &name) const {
    for (const auto &[n, m] : matrices) {
        if (n == name) {
            return m;
        }
    }
    throw ParseError("record of kind '" + kind + "' has no matrix '" + name + "'");
}

void write_record(std::ostream &out, const Record &rec) {
    out << "quditnn-record " << rec.version << '\n';
    out << "kind " << rec.kind << '\n';
    for (const auto &[k, v] : rec.fields) {
        out << "field " << k << ' ' << v << '\n';
    }
    for (const auto &[name, m] : rec.matrices) {
        out << "matrix " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            for (Eigen::Index j = 0; j < m.cols(); ++j) {
                if (j > 0) {
                    out << ' ';
                }
                out << format_hex(m(i, j));
            }
            out << '\n';
        }
    }
    out << "end\n";
}

Record read_record(std::istream &in) {
    Record rec;
    std::string line;
    std::size_t line_no = 0;
    auto next_line = [&](const char *what) {
        if (!std::getline(in, line)) {
            throw ParseError(std::string("unexpected end of record while reading ") + what);
        }
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
    };
    auto fail = [&](const std::string &msg) {
        throw ParseError("record line " + std::to_string(line_no) + ": " + msg);
    };

    next_line("header");
    {
        std::istringstream ss(line);
        std::string magic;
        ss >> magic >> rec.version;
        if (magic != "quditnn-record" || !ss) {
            fail("not a quditnn record");
        }
        if (rec.version != Record::kFormatVersion) {
            fail("unsupported record version " + std::to_string(rec.version));
        }
    }
    next_line("kind");
    if (line.rfind("kind ", 0) != 0) {
        fail("expected 'kind'");
    }
    rec.kind = line.substr(5);

    for (;;) {
        next_line("body");
        if (line == "end") {
            break;
        }
        std::istringstream ss(line);
        std::string tag;
        ss >> tag;
        if (tag == "field") {
            std::string key;
            ss >> key;
            if (key.empty()) {
                fail("field without key");
            }
            std::string value;
            std::getline(ss, value);
            if (!value.empty() && value.front() == ' ') {
                value.erase(0, 1);
            }
            rec.fields.emplace_back(std::move(key), std::move(value));
        } else if (tag == "matrix") {
            std::string name;
            long rows = -1;
            long cols = -1;
            ss >> name >> rows >> cols;
            if (!ss || rows < 0 || cols < 0) {
                fail("bad matrix header");
            }
            RealMatrix m(rows, cols);
            for (long i = 0; i < rows; ++i) {
                next_line("matrix row");
                std::istringstream rs(line);
                for (long j = 0; j < cols; ++j) {
                    std::string tok;
                    if (!(rs >> tok)) {
                        fail("matrix '" + name + "' row " + std::to_string(i) + " is short");
                    }
                    m(i, j) = parse_double(tok);
                }
                std::string extra;
                if (rs >> extra) {
                    fail("matrix '" + name + "' row " + std::to_string(i) + " is long");
                }
            }
            rec.matrices.emplace_back(std::move(name), std::move(m));
        } else {
            fail("unknown tag '" + tag + "'");
        }
    }
    return rec;
}

void save_record(const std::string &path, const Record &rec) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot open '" + path + "' for writing");
    }
    write_record(out, rec);
    if (!out) {
        throw Error("failed writing '" + path + "'");
    }
}

Record load_record(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open '" + path + "'");
    }
    return read_record(in);
}

} // namespace quditnn
