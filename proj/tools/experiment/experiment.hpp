#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "quditnn/baselines.hpp"
#include "quditnn/config.hpp"
#include "quditnn/data.hpp"
#include "quditnn/metrics.hpp"
#include "quditnn/model.hpp"
#include "quditnn/training.hpp"

namespace quditnn {

enum class ModelKind { Qnn, LogReg, Mlp };

std::string_view to_string(ModelKind k);
ModelKind parse_model_kind(std::string_view s);

std::string_view to_string(EditVariant v);
EditVariant parse_edit_variant(std::string_view s);

struct ExperimentConfig {
    ModelKind model = ModelKind::Qnn;
    std::string dataset;
    std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    std::array<double, 3> split_ratios = kDefaultSplitRatios;

    std::size_t dim = 5;
    std::size_t layers = 16;
    Readout readout = Readout::Parity;
    ImportanceMode importance_mode = ImportanceMode::SignedSum;
    InputMap input_map = InputMap::Identity;

    TrainConfig train;
    LogRegConfig logreg;
    MlpConfig mlp;

    std::size_t poison_count = 7;
    PoisonMode poison_mode = PoisonMode::TrainAndTest;
    std::size_t wis_k = 16; // 0 selects the informative-set size
    std::size_t random_wis_trials = 100000;
    EditVariant edit_variant = EditVariant::Levenshtein;

    std::string output_dir;

    /// Reads every known key; unknown keys are a ParseError.
    static ExperimentConfig from_document(ConfigDocument &doc);
    /// Full resolved config as `key = value` lines, sorted by key.
    std::string to_text() const;
    /// Throws StructuralError on invalid combinations (e.g. d^2-1 < features).
    void validate(std::size_t num_features) const;
};

/// Output directory: explicit value, else $QUDITNN_OUT_DIR, else "runs".
std::string resolve_output_dir(const std::string &explicit_dir);

struct SeedResult {
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    double macro_f1 = 0.0;
    std::optional<double> edit_distance; // to the logistic-regression ranking
    std::optional<double> wis;
    std::optional<double> random_wis;
    std::vector<std::size_t> poisoned;
    std::size_t best_epoch = 0;
    std::size_t stopped_epoch = 0;
};

struct Summary {
    double mean = 0.0;
    double std = 0.0; // population (ddof 0)
    std::size_t count = 0;
};

Summary summarize(const std::vector<double> &values);

struct MetricsReport {
    std::string command; // train | evaluate | poison-study
    std::string model;
    std::string config_text;
    std::string dataset_path;
    DatasetFingerprint fingerprint;
    std::string readout;
    std::string input_map;
    std::string importance_mode;
    std::string poison_mode; // empty unless a poisoning run
    std::string edit_variant;
    std::size_t parameter_count = 0;
    std::size_t wis_k = 0;
    std::vector<SeedResult> seeds;

    std::vector<std::uint64_t> failed_seeds() const;
    bool all_ok() const { return failed_seeds().empty(); }

    std::optional<Summary> aggregate(std::string_view metric) const;
};

/// Deterministic JSON text (sorted keys, no timestamps).
std::string to_json(const MetricsReport &report);
MetricsReport report_from_json(const std::string &text);

void save_report(const std::string &path, const MetricsReport &report);
MetricsReport load_report(const std::string &path);

/// Progress sink; receives one line per event.
using Logger = std::function<void(const std::string &)>;

/// Runs the given command for every seed. Per-seed failures are recorded
/// in the report instead of aborting the remaining seeds. Artifacts go to
/// `<output_dir>/<model>/`.
MetricsReport run_train(const ExperimentConfig &config, const Logger &log = {});
MetricsReport run_evaluate(const ExperimentConfig &config, const Logger &log = {});
MetricsReport run_poison_study(const ExperimentConfig &config, const Logger &log = {});

/// Same, over an already loaded raw dataset (used by tests).
MetricsReport run_train(const ExperimentConfig &config, const Dataset &raw, const Logger &log = {});
MetricsReport run_evaluate(const ExperimentConfig &config, const Dataset &raw, const Logger &log = {});
MetricsReport run_poison_study(const ExperimentConfig &config, const Dataset &raw, const Logger &log = {});

// ---------------------------------------------------------------------------
// Comparison tables

struct ComparisonRow {
    std::string model;
    std::string source; // "reproduced" or "published reference, not reproduced"
    std::size_t seeds = 0;
    std::optional<std::size_t> parameter_count;
    std::optional<Summary> macro_f1;
    std::optional<Summary> edit_distance;
    std::optional<Summary> wis;
    std::optional<Summary> random_wis;
    std::string poison_mode;
};

struct Comparison {
    std::string fingerprint;
    std::vector<ComparisonRow> rows;
};

/// One row per report, plus the random-forest reference row (stored
/// constants) when more than one report is compared. Throws
/// StructuralError on an empty list or mixed dataset fingerprints.
Comparison compare_reports(const std::vector<MetricsReport> &reports);

std::string render_table(const Comparison &c);
std::string comparison_csv(const Comparison &c);
std::string to_json(const Comparison &c);
Comparison comparison_from_json(const std::string &text);

} // namespace quditnn
