#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "quditnn/linalg.hpp"
#include "quditnn/model.hpp"

namespace quditnn {

enum class Split : std::uint8_t { Train, Validation, Test };

std::string_view to_string(Split s);

struct Standardization {
    RealVector mean;
    RealVector stddev;
};

enum class PoisonMode { TrainAndTest, TestOnly };

std::string_view to_string(PoisonMode m);
PoisonMode parse_poison_mode(std::string_view s);

/// Columns to overwrite with Gaussian noise in standardized units.
struct PoisonSpec {
    std::vector<std::size_t> indices;
    PoisonMode mode = PoisonMode::TrainAndTest;
    std::uint64_t seed = 0;
    double mean = 0.0;
    double stddev = 1.0;
};

/// Tabular binary-classification data with split tags.
struct Dataset {
    FeatureMatrix features;
    std::vector<int> labels;
    std::vector<std::string> feature_names;
    std::vector<Split> split; // empty until stratified_split()
    std::optional<Standardization> standardization;
    std::optional<PoisonSpec> poison;

    std::size_t rows() const { return labels.size(); }
    std::size_t cols() const { return static_cast<std::size_t>(features.cols()); }
    std::size_t positives() const;

    /// Row indices carrying the given tag, ascending.
    std::vector<std::size_t> indices(Split s) const;
    std::vector<int> labels_of(std::span<const std::size_t> rows) const;

    /// Throws StructuralError on shape or label inconsistencies.
    void validate() const;
};

/// Feature columns of the Taiwan credit-default file, in file order.
inline constexpr std::array<std::string_view, 23> kTaiwanFeatureNames = {
    "LIMIT_BAL", "SEX",       "EDUCATION", "MARRIAGE",  "AGE",       "PAY_0",     "PAY_2",    "PAY_3",
    "PAY_4",     "PAY_5",     "PAY_6",     "BILL_AMT1", "BILL_AMT2", "BILL_AMT3", "BILL_AMT4", "BILL_AMT5",
    "BILL_AMT6", "PAY_AMT1",  "PAY_AMT2",  "PAY_AMT3",  "PAY_AMT4",  "PAY_AMT5",  "PAY_AMT6"};

inline constexpr std::string_view kTaiwanLabelName = "default payment next month";
inline constexpr std::size_t kTaiwanRows = 30000;
inline constexpr std::size_t kTaiwanPositives = 6626;

/// Reads the 25-column CSV (ID, 23 features, label) with a header row.
/// The ID column is dropped. Throws SchemaError for a header that does not
/// match (naming the offending column) and ParseError for bad cells.
Dataset load_taiwan(std::istream &in, const std::string &source = "<stream>");
Dataset load_taiwan(const std::string &path);

/// Rewrites the two-header-row UCI spreadsheet export (X1..X23,Y above the
/// real names) into the canonical single-header CSV. Canonical input is
/// passed through with a normalized header. Returns the number of data rows.
std::size_t convert_uci_export(std::istream &in, std::ostream &out);

/// Canonical CSV echo of the dataset (ID = row index + 1). Values are
/// written with round-trip precision.
void write_canonical_csv(std::ostream &out, const Dataset &ds);

/// Per-class shuffled assignment to train/validation/test with the given
/// ratios (non-negative, summing to 1 within 1e-9).
Dataset stratified_split(const Dataset &ds, std::array<double, 3> ratios, std::uint64_t seed);

inline constexpr std::array<double, 3> kDefaultSplitRatios = {0.70, 0.15, 0.15};

/// Z-score every column with train-split statistics (population std).
/// Throws StructuralError when no split is assigned or a train column is
/// constant (std < 1e-12).
Dataset standardize(const Dataset &ds);

/// Replaces the selected columns with seeded N(mean, stddev) draws. The
/// dataset must be standardized. TestOnly touches test rows only.
Dataset poison(const Dataset &ds, const PoisonSpec &spec);

/// `count` distinct feature indices, uniformly at random, sorted.
std::vector<std::size_t> draw_poison_indices(std::size_t num_features, std::size_t count, std::mt19937_64 &rng);

struct DatasetFingerprint {
    std::size_t rows = 0;
    std::size_t positives = 0;
    std::string feature_name_hash; // FNV-1a 64 over the comma-joined names, hex

    bool operator==(const DatasetFingerprint &) const = default;
};

DatasetFingerprint fingerprint(const Dataset &ds);

} // namespace quditnn
