#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "quditnn/config.hpp"
#include "quditnn/data.hpp"
#include "quditnn/generators.hpp"
#include "quditnn/loss.hpp"
#include "quditnn/model.hpp"

namespace quditnn {

struct TrainConfig {
    double learning_rate = 5e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double ridge = 1e-4; // lambda
    std::size_t batch_size = 256;
    std::size_t max_epochs = 300; // 0 returns the initialization
    std::size_t patience = 20;
    double min_delta = 1e-4; // may be +inf
    bool class_weighting = true;
    std::uint64_t seed = 0;
    double weight_init_scale = 0.1; // uniform(-s, s)
    bool tune_threshold = false;
    unsigned threads = 1;

    /// Throws StructuralError naming the first out-of-range field.
    void validate() const;

    /// Reads the `train.*` keys of the document over the defaults.
    static TrainConfig from_document(ConfigDocument &doc, const std::string &prefix = "train.");
    void write(std::ostream &out, const std::string &prefix = "train.") const;
};

struct EpochRecord {
    std::size_t epoch = 0; // 1-based
    double train_loss = 0.0;
    double val_loss = 0.0;
    double val_macro_f1 = 0.0;
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;
    std::size_t stopped_epoch = 0; // last epoch run, 0 if none
    std::size_t best_epoch = 0;    // epoch whose parameters were returned, 0 = initialization

    /// `epoch,train_loss,val_loss,val_macro_f1`, values with round-trip precision.
    void write_csv(std::ostream &out) const;
};

struct AdamConfig {
    double learning_rate = 5e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    std::uint64_t t = 0; // steps taken

    explicit AdamState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

/// One bias-corrected Adam update in place. Throws StructuralError on
/// mismatched sizes.
void adam_step(std::span<double> params, std::span<const double> gradient, AdamState &state, const AdamConfig &config);

/// Validation-loss early stopping. The first observation always counts as
/// an improvement; later ones must beat the reference by more than
/// `min_delta`. The best epoch is tracked separately as the strict argmin.
class EarlyStopping {
  public:
    EarlyStopping(std::size_t patience, double min_delta) : patience_(patience), min_delta_(min_delta) {}

    /// Records an epoch's validation loss; returns true when training should stop.
    bool observe(std::size_t epoch, double val_loss);
    /// True when the last observed epoch is the new best.
    bool last_was_best() const { return last_best_; }
    std::size_t best_epoch() const { return best_epoch_; }
    double best_loss() const { return best_loss_; }

  private:
    std::size_t patience_;
    double min_delta_;
    std::size_t seen_ = 0;
    std::size_t stale_ = 0;
    double reference_ = 0.0;
    double best_loss_ = 0.0;
    std::size_t best_epoch_ = 0;
    bool last_best_ = false;
};

/// Threshold on q1 maximizing macro-F1 over the given scores, chosen
/// among the midpoints between distinct sorted scores (0.5 if no
/// threshold beats it). Ties favour the threshold closest to 0.5.
double tune_threshold(std::span<const double> q1, std::span<const int> labels);

struct QnnArchitecture {
    std::size_t dim = 5;
    std::size_t layers = 16;
    Readout readout = Readout::Parity;
    std::optional<std::vector<int>> slot_feature; // default: features first, rest bias
    InputMap input_map = InputMap::Identity;
};

struct QnnTrainResult {
    ModelParams params;
    TrainHistory history;
    ClassWeights class_weights;
};

/// Called after each epoch; returning false stops training early.
using EpochCallback = std::function<bool(const EpochRecord &)>;

/// Adam on mean weighted cross-entropy + ridge over seeded mini-batches
/// of the train split, with early stopping on validation loss. Returns
/// the parameters of the best validation epoch.
///
/// Throws StructuralError when the train or validation split is empty,
/// and NumericalError with epoch/batch diagnostics on a non-finite loss.
QnnTrainResult train_qnn(const Dataset &ds, const QnnArchitecture &arch, const TrainConfig &config,
                         const GeneratorSet &gs, const EpochCallback &on_epoch = {});

/// q1 for every listed row.
std::vector<double> predict_q1(const Dataset &ds, std::span<const std::size_t> rows, const ModelParams &params,
                               const GeneratorSet &gs, unsigned threads = 1);

/// Deterministic sub-seed for a named purpose, from std::seed_seq.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t purpose, std::uint64_t index = 0);

} // namespace quditnn
