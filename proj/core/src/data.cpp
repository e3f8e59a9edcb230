#include "quditnn/data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "quditnn/errors.hpp"
#include "quditnn/record.hpp"

namespace quditnn {

std::string_view to_string(Split s) {
    switch (s) {
    case Split::Train:
        return "train";
    case Split::Validation:
        return "validation";
    case Split::Test:
        return "test";
    }
    return "unknown";
}

std::string_view to_string(PoisonMode m) {
    switch (m) {
    case PoisonMode::TrainAndTest:
        return "train-and-test";
    case PoisonMode::TestOnly:
        return "test-only";
    }
    return "unknown";
}

PoisonMode parse_poison_mode(std::string_view s) {
    if (s == "train-and-test") {
        return PoisonMode::TrainAndTest;
    }
    if (s == "test-only") {
        return PoisonMode::TestOnly;
    }
    throw StructuralError("unknown poison mode '" + std::string(s) + "' (expected train-and-test|test-only)");
}

std::size_t Dataset::positives() const {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
}

std::vector<std::size_t> Dataset::indices(Split s) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < split.size(); ++i) {
        if (split[i] == s) {
            out.push_back(i);
        }
    }
    return out;
}

std::vector<int> Dataset::labels_of(std::span<const std::size_t> rows) const {
    std::vector<int> out;
    out.reserve(rows.size());
    for (auto r : rows) {
        out.push_back(labels[r]);
    }
    return out;
}

void Dataset::validate() const {
    if (labels.empty()) {
        throw StructuralError("dataset has no rows");
    }
    if (static_cast<std::size_t>(features.rows()) != labels.size()) {
        throw StructuralError("dataset has " + std::to_string(features.rows()) + " feature rows but " +
                              std::to_string(labels.size()) + " labels");
    }
    if (feature_names.size() != cols()) {
        throw StructuralError("dataset has " + std::to_string(cols()) + " columns but " +
                              std::to_string(feature_names.size()) + " feature names");
    }
    if (!split.empty() && split.size() != labels.size()) {
        throw StructuralError("split tags do not cover every row");
    }
    for (int y : labels) {
        if (y != 0 && y != 1) {
            throw StructuralError("labels must be 0 or 1");
        }
    }
}

namespace {

std::vector<std::string> split_csv_line(const std::string &line) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cell += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cell += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            cells.push_back(std::move(cell));
            cell.clear();
        } else {
            cell += c;
        }
    }
    cells.push_back(std::move(cell));
    return cells;
}

std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t");
    if (first == std::string::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t");
    return s.substr(first, last - first + 1);
}

bool read_line(std::istream &in, std::string &line) {
    if (!std::getline(in, line)) {
        return false;
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    return true;
}

void strip_bom(std::string &line) {
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF &&
        static_cast<unsigned char>(line[1]) == 0xBB && static_cast<unsigned char>(line[2]) == 0xBF) {
        line.erase(0, 3);
    }
}

std::string normalize_label_name(std::string s) {
    for (auto &c : s) {
        if (c == '.' || c == '_') {
            c = ' ';
        }
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return s;
}

bool is_label_header(const std::string &cell) {
    const std::string n = normalize_label_name(cell);
    return n == kTaiwanLabelName || n == "default" || n == "y";
}

void check_header(const std::vector<std::string> &header, const std::string &source) {
    constexpr std::size_t kColumns = kTaiwanFeatureNames.size() + 2;
    for (std::size_t c = 0; c < std::min(header.size(), kColumns); ++c) {
        const std::string cell = trim(header[c]);
        std::string expected;
        bool ok = false;
        if (c == 0) {
            expected = "ID";
            ok = cell == "ID" || cell == "id";
        } else if (c <= kTaiwanFeatureNames.size()) {
            expected = std::string(kTaiwanFeatureNames[c - 1]);
            // PAY_1 is a common alias of PAY_0 in redistributed copies
            ok = cell == expected || (expected == "PAY_0" && cell == "PAY_1");
        } else {
            expected = std::string(kTaiwanLabelName);
            ok = is_label_header(cell);
        }
        if (!ok) {
            throw SchemaError(source + ": column " + std::to_string(c + 1) + " is '" + cell + "', expected '" +
                              expected + "'");
        }
    }
    if (header.size() < kColumns) {
        const std::size_t c = header.size();
        const std::string missing =
            c <= kTaiwanFeatureNames.size() ? std::string(kTaiwanFeatureNames[c - 1]) : std::string(kTaiwanLabelName);
        throw SchemaError(source + ": missing column '" + missing + "' (header has " + std::to_string(header.size()) +
                          " of " + std::to_string(kColumns) + " columns)");
    }
    if (header.size() > kColumns) {
        throw SchemaError(source + ": unexpected extra column '" + trim(header[kColumns]) + "'");
    }
}

double parse_cell(const std::string &cell, std::size_t row, std::size_t col, const std::string &source) {
    try {
        return parse_double(trim(cell));
    } catch (const ParseError &) {
        throw ParseError(source + ": row " + std::to_string(row) + ", column " + std::to_string(col) +
                         ": cannot parse '" + cell + "' as a number");
    }
}

} // namespace

Dataset load_taiwan(std::istream &in, const std::string &source) {
    std::string line;
    if (!read_line(in, line)) {
        throw SchemaError(source + ": empty file, expected a header row");
    }
    strip_bom(line);
    check_header(split_csv_line(line), source);

    constexpr std::size_t kColumns = kTaiwanFeatureNames.size() + 2;
    std::vector<double> values;
    std::vector<int> labels;
    std::size_t row = 1;
    while (read_line(in, line)) {
        ++row;
        if (trim(line).empty()) {
            continue;
        }
        const auto cells = split_csv_line(line);
        if (cells.size() != kColumns) {
            throw ParseError(source + ": row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                             " cells, expected " + std::to_string(kColumns));
        }
        for (std::size_t c = 1; c <= kTaiwanFeatureNames.size(); ++c) {
            const double v = parse_cell(cells[c], row, c + 1, source);
            if (!std::isfinite(v)) {
                throw ParseError(source + ": row " + std::to_string(row) + ", column " + std::to_string(c + 1) +
                                 " is not finite");
            }
            values.push_back(v);
        }
        const double y = parse_cell(cells[kColumns - 1], row, kColumns, source);
        if (y != 0.0 && y != 1.0) {
            throw ParseError(source + ": row " + std::to_string(row) + ": label must be 0 or 1");
        }
        labels.push_back(static_cast<int>(y));
    }
    if (labels.empty()) {
        throw SchemaError(source + ": no data rows");
    }
    Dataset ds;
    const auto n = static_cast<Eigen::Index>(labels.size());
    const auto m = static_cast<Eigen::Index>(kTaiwanFeatureNames.size());
    ds.features = Eigen::Map<const FeatureMatrix>(values.data(), n, m);
    ds.labels = std::move(labels);
    ds.feature_names.assign(kTaiwanFeatureNames.begin(), kTaiwanFeatureNames.end());
    return ds;
}

Dataset load_taiwan(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open dataset '" + path + "'");
    }
    return load_taiwan(in, path);
}

std::size_t convert_uci_export(std::istream &in, std::ostream &out) {
    std::string line;
    if (!read_line(in, line)) {
        throw SchemaError("convert: empty input");
    }
    strip_bom(line);
    auto cells = split_csv_line(line);
    // the spreadsheet export carries a row of X1..X23,Y aliases first
    const bool alias_row = std::any_of(cells.begin(), cells.end(), [](const std::string &c) {
        return trim(c) == "X1";
    });
    if (alias_row) {
        if (!read_line(in, line)) {
            throw SchemaError("convert: missing second header row");
        }
        cells = split_csv_line(line);
    }
    check_header(cells, "convert");

    out << "ID";
    for (auto name : kTaiwanFeatureNames) {
        out << ',' << name;
    }
    out << ',' << kTaiwanLabelName << '\n';

    constexpr std::size_t kColumns = kTaiwanFeatureNames.size() + 2;
    std::size_t rows = 0;
    std::size_t line_no = alias_row ? 2 : 1;
    while (read_line(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        const auto row = split_csv_line(line);
        if (row.size() != kColumns) {
            throw ParseError("convert: line " + std::to_string(line_no) + " has " + std::to_string(row.size()) +
                             " cells, expected " + std::to_string(kColumns));
        }
        for (std::size_t c = 0; c < kColumns; ++c) {
            const std::string cell = trim(row[c]);
            parse_cell(cell, line_no, c + 1, "convert");
            out << (c > 0 ? "," : "") << cell;
        }
        out << '\n';
        ++rows;
    }
    return rows;
}

void write_canonical_csv(std::ostream &out, const Dataset &ds) {
    out << "ID";
    for (const auto &name : ds.feature_names) {
        out << ',' << name;
    }
    out << ',' << kTaiwanLabelName << '\n';
    char buf[40];
    for (std::size_t i = 0; i < ds.rows(); ++i) {
        out << (i + 1);
        for (std::size_t c = 0; c < ds.cols(); ++c) {
            std::snprintf(buf, sizeof buf, "%.17g",
                          ds.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)));
            out << ',' << buf;
        }
        out << ',' << ds.labels[i] << '\n';
    }
}

Dataset stratified_split(const Dataset &ds, std::array<double, 3> ratios, std::uint64_t seed) {
    ds.validate();
    double total = 0.0;
    std::size_t active = 0;
    for (double r : ratios) {
        if (!(r >= 0.0) || !std::isfinite(r)) {
            throw StructuralError("split ratios must be finite and non-negative");
        }
        total += r;
        active += r > 0.0 ? 1 : 0;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw StructuralError("split ratios must sum to 1");
    }
    Dataset out = ds;
    out.split.assign(ds.rows(), Split::Train);
    std::mt19937_64 rng(seed);
    for (int cls = 0; cls < 2; ++cls) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < ds.rows(); ++i) {
            if (ds.labels[i] == cls) {
                members.push_back(i);
            }
        }
        if (members.size() < active) {
            throw StructuralError("class " + std::to_string(cls) + " has " + std::to_string(members.size()) +
                                  " samples, fewer than the " + std::to_string(active) + " requested splits");
        }
        std::shuffle(members.begin(), members.end(), rng);
        const double n = static_cast<double>(members.size());
        auto n_train = static_cast<std::size_t>(std::llround(ratios[0] * n));
        auto n_val = static_cast<std::size_t>(std::llround(ratios[1] * n));
        n_train = std::min(n_train, members.size());
        n_val = std::min(n_val, members.size() - n_train);
        if (ratios[2] == 0.0) {
            // nothing left over for test: give rounding residue to train
            n_train = members.size() - n_val;
        }
        for (std::size_t k = 0; k < members.size(); ++k) {
            const Split s = k < n_train ? Split::Train : (k < n_train + n_val ? Split::Validation : Split::Test);
            out.split[members[k]] = s;
        }
    }
    return out;
}

Dataset standardize(const Dataset &ds) {
    ds.validate();
    if (ds.split.empty()) {
        throw StructuralError("standardize needs split tags; run stratified_split first");
    }
    const auto train = ds.indices(Split::Train);
    if (train.empty()) {
        throw StructuralError("standardize needs at least one train row");
    }
    const auto m = static_cast<Eigen::Index>(ds.cols());
    Standardization st{RealVector::Zero(m), RealVector::Zero(m)};
    for (auto r : train) {
        st.mean += ds.features.row(static_cast<Eigen::Index>(r)).transpose();
    }
    st.mean /= static_cast<double>(train.size());
    for (auto r : train) {
        st.stddev += (ds.features.row(static_cast<Eigen::Index>(r)).transpose() - st.mean).cwiseAbs2();
    }
    st.stddev = (st.stddev / static_cast<double>(train.size())).cwiseSqrt();
    for (Eigen::Index c = 0; c < m; ++c) {
        if (!(st.stddev(c) >= 1e-12)) {
            throw StructuralError("feature '" + ds.feature_names[static_cast<std::size_t>(c)] +
                                  "' is constant on the train split");
        }
    }
    Dataset out = ds;
    for (Eigen::Index r = 0; r < out.features.rows(); ++r) {
        out.features.row(r) = (out.features.row(r) - st.mean.transpose()).cwiseQuotient(st.stddev.transpose());
    }
    out.standardization = std::move(st);
    return out;
}

Dataset poison(const Dataset &ds, const PoisonSpec &spec) {
    if (!ds.standardization) {
        throw StructuralError("poison expects a standardized dataset");
    }
    for (auto f : spec.indices) {
        if (f >= ds.cols()) {
            throw StructuralError("poison index " + std::to_string(f) + " is out of range for " +
                                  std::to_string(ds.cols()) + " features");
        }
    }
    Dataset out = ds;
    if (spec.indices.empty()) {
        return out;
    }
    if (spec.mode == PoisonMode::TestOnly && ds.split.empty()) {
        throw StructuralError("test-only poisoning needs split tags");
    }
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> noise(spec.mean, spec.stddev);
    std::vector<std::size_t> cols = spec.indices;
    std::sort(cols.begin(), cols.end());
    cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
    for (auto c : cols) {
        for (std::size_t r = 0; r < ds.rows(); ++r) {
            if (spec.mode == PoisonMode::TestOnly && ds.split[r] != Split::Test) {
                continue;
            }
            out.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = noise(rng);
        }
    }
    out.poison = spec;
    return out;
}

std::vector<std::size_t> draw_poison_indices(std::size_t num_features, std::size_t count, std::mt19937_64 &rng) {
    if (count > num_features) {
        throw StructuralError("cannot poison " + std::to_string(count) + " of " + std::to_string(num_features) +
                              " features");
    }
    std::vector<std::size_t> all(num_features);
    std::iota(all.begin(), all.end(), std::size_t{0});
    // partial Fisher-Yates with explicit uniform draws
    for (std::size_t i = 0; i < count; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, num_features - 1);
        std::swap(all[i], all[pick(rng)]);
    }
    all.resize(count);
    std::sort(all.begin(), all.end());
    return all;
}

DatasetFingerprint fingerprint(const Dataset &ds) {
    std::uint64_t h = 14695981039346656037ULL;
    bool first = true;
    for (const auto &name : ds.feature_names) {
        if (!first) {
            h ^= static_cast<unsigned char>(',');
            h *= 1099511628211ULL;
        }
        first = false;
        for (unsigned char c : name) {
            h ^= c;
            h *= 1099511628211ULL;
        }
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return {ds.rows(), ds.positives(), buf};
}

} // namespace quditnn
