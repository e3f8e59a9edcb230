#pragma once

#include <cstddef>
#include <span>

#include "quditnn/generators.hpp"
#include "quditnn/model.hpp"

namespace quditnn {

/// Class weights (u0, u1) applied to the cross-entropy terms.
struct ClassWeights {
    double u0 = 1.0;
    double u1 = 1.0;

    double operator[](int label) const { return label == 0 ? u0 : u1; }
};

inline constexpr double kProbabilityClamp = 1e-12;

/// -u_y log(max(q_y, 1e-12)).
double cross_entropy(const ClassDistribution &q, int label, const ClassWeights &weights = {});

/// d CE / d p_k for the given readout; zero where the clamp is active.
RealVector cross_entropy_probability_gradient(std::span<const double> probs, int label, Readout scheme,
                                              const ClassWeights &weights);

struct LossConfig {
    double ridge = 0.0; // lambda
    ClassWeights class_weights;
};

/// Rows of a feature matrix together with their labels. An empty `rows`
/// selects every row.
struct BatchRef {
    const FeatureMatrix &features;
    std::span<const int> labels;
    std::span<const std::size_t> rows = {};

    std::size_t size() const { return rows.empty() ? static_cast<std::size_t>(features.rows()) : rows.size(); }
    std::size_t row(std::size_t i) const { return rows.empty() ? i : rows[i]; }
    std::span<const double> sample(std::size_t i) const {
        const auto r = static_cast<Eigen::Index>(row(i));
        return {features.row(r).data(), static_cast<std::size_t>(features.cols())};
    }
    int label(std::size_t i) const { return labels[row(i)]; }
};

/// lambda * sum of squared weights.
double ridge_penalty(const RealMatrix &weights, double lambda);

/// Mean weighted cross-entropy over the batch + ridge penalty.
/// Throws StructuralError on an empty batch.
double total_loss(const BatchRef &batch, const ModelParams &params, const GeneratorSet &gs,
                  const LossConfig &config, unsigned threads = 1);

/// u_c = N / (2 N_c) from the given labels (1 for an absent class).
ClassWeights balanced_class_weights(std::span<const int> labels);

} // namespace quditnn
