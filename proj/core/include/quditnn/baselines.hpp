#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "quditnn/config.hpp"
#include "quditnn/data.hpp"
#include "quditnn/loss.hpp"
#include "quditnn/ranking.hpp"
#include "quditnn/record.hpp"
#include "quditnn/training.hpp"

namespace quditnn {

// ---------------------------------------------------------------------------
// Logistic regression

struct LogRegConfig {
    double learning_rate = 0.1;
    double l2 = 1e-4; // on coefficients, not the intercept
    std::size_t max_epochs = 5000;
    double gradient_tolerance = 1e-6;
    bool class_weighting = true;
    std::uint64_t seed = 0; // full-batch GD from zero: accepted for symmetry, unused

    void validate() const;
    static LogRegConfig from_document(ConfigDocument &doc, const std::string &prefix = "logreg.");
    void write(std::ostream &out, const std::string &prefix = "logreg.") const;
};

struct LogRegModel {
    RealVector coefficients;
    double intercept = 0.0;
    double decision_threshold = 0.5;

    std::size_t parameter_count() const { return static_cast<std::size_t>(coefficients.size()) + 1; }
    double logit(std::span<const double> x) const;
    double probability(std::span<const double> x) const;
    int predict(std::span<const double> x) const { return probability(x) >= decision_threshold ? 1 : 0; }
    void validate() const;
};

struct LogRegGradient {
    double loss = 0.0;
    RealVector coefficients;
    double intercept = 0.0;
};

/// Mean weighted cross-entropy + l2 * |coef|^2 and its gradient.
LogRegGradient logreg_loss_gradient(const LogRegModel &model, const BatchRef &batch, const ClassWeights &weights,
                                    double l2);

struct LogRegFit {
    LogRegModel model;
    std::size_t epochs = 0;
    double gradient_norm = 0.0;
    bool converged = false;
    ClassWeights class_weights;
};

/// Full-batch gradient descent on the train split from zero, until the
/// gradient norm drops below the tolerance or max_epochs is reached.
/// Throws NumericalError with the epoch when the loss turns non-finite.
LogRegFit train_logreg(const Dataset &ds, const LogRegConfig &config);

/// Features by |coefficient| descending, ties by index.
RankedFeatureList logreg_ranking(const LogRegModel &model);

Record to_record(const LogRegModel &model);
LogRegModel logreg_from_record(const Record &rec);

// ---------------------------------------------------------------------------
// Dense network

enum class Activation { Relu, Tanh };

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view s);

struct MlpConfig {
    std::vector<std::size_t> hidden = {36, 26};
    Activation activation = Activation::Relu;
    double learning_rate = 1e-3; // 0 allowed: parameters stay at their initialization
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::size_t batch_size = 256;
    std::size_t max_epochs = 300;
    std::size_t patience = 20;
    double min_delta = 1e-4;
    bool class_weighting = true;
    bool zero_init = false;
    std::uint64_t seed = 0;

    void validate() const;
    static MlpConfig from_document(ConfigDocument &doc, const std::string &prefix = "mlp.");
    void write(std::ostream &out, const std::string &prefix = "mlp.") const;
};

/// Fully connected network with a single sigmoid output giving q1.
///
/// Parameters live in one flat vector; layer k stores its weight matrix
/// (out x in, column-major) followed by its bias.
struct MlpModel {
    std::vector<std::size_t> sizes; // input, hidden..., 1
    Activation activation = Activation::Relu;
    std::vector<double> params;
    double decision_threshold = 0.5;

    /// Zero parameters. Throws StructuralError with no hidden layers or a
    /// zero-width layer.
    static MlpModel make(std::size_t inputs, std::span<const std::size_t> hidden, Activation activation);

    std::size_t layers() const { return sizes.size() - 1; }
    std::size_t parameter_count() const { return params.size(); }
    std::size_t offset(std::size_t layer) const; // start of layer's weights

    double probability(std::span<const double> x) const;
    int predict(std::span<const double> x) const { return probability(x) >= decision_threshold ? 1 : 0; }
    void validate() const;
};

/// Mean weighted cross-entropy over the batch and its gradient (one entry per parameter).
double mlp_loss_gradient(const MlpModel &model, const BatchRef &batch, const ClassWeights &weights,
                         std::vector<double> &gradient);

struct MlpFit {
    MlpModel model;
    TrainHistory history;
    ClassWeights class_weights;
};

/// Adam on mini-batches of the train split with early stopping on the
/// validation loss; returns the best validation epoch's parameters.
MlpFit train_mlp(const Dataset &ds, const MlpConfig &config, const EpochCallback &on_epoch = {});

Record to_record(const MlpModel &model);
MlpModel mlp_from_record(const Record &rec);

} // namespace quditnn
