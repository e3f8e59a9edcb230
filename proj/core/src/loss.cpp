#include "quditnn/loss.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "quditnn/errors.hpp"
#include "quditnn/parallel.hpp"

namespace quditnn {

double cross_entropy(const ClassDistribution &q, int label, const ClassWeights &weights) {
    return -weights[label] * std::log(std::max(q[label], kProbabilityClamp));
}

RealVector cross_entropy_probability_gradient(std::span<const double> probs, int label, Readout scheme,
                                              const ClassWeights &weights) {
    const auto d = static_cast<Eigen::Index>(probs.size());
    RealVector g = RealVector::Zero(d);
    const ClassDistribution q = readout(probs, scheme);
    const double qy = q[label];
    if (qy <= kProbabilityClamp) {
        return g;
    }
    const double dce_dq = -weights[label] / qy;
    switch (scheme) {
    case Readout::Parity:
        // q1 = sum_odd p_k and q0 = 1 - q1
        for (Eigen::Index k = 1; k < d; k += 2) {
            g(k) = label == 1 ? dce_dq : -dce_dq;
        }
        break;
    case Readout::FirstTwo: {
        const double mass = probs[0] + probs[1];
        const double py = probs[static_cast<std::size_t>(label)];
        const int other = 1 - label;
        g(label) = dce_dq * (mass - py) / (mass * mass);
        g(other) = dce_dq * (-py) / (mass * mass);
        break;
    }
    }
    return g;
}

double ridge_penalty(const RealMatrix &weights, double lambda) {
    return lambda == 0.0 ? 0.0 : lambda * weights.squaredNorm();
}

double total_loss(const BatchRef &batch, const ModelParams &params, const GeneratorSet &gs,
                  const LossConfig &config, unsigned threads) {
    const std::size_t n = batch.size();
    if (n == 0) {
        throw StructuralError("loss over an empty batch");
    }
    std::vector<double> losses(n);
    parallel_for(n, threads, [&](std::size_t i) {
        const RealVector p = forward(batch.sample(i), params, gs);
        const auto q = readout(std::span<const double>(p.data(), static_cast<std::size_t>(p.size())),
                               params.readout);
        losses[i] = cross_entropy(q, batch.label(i), config.class_weights);
    });
    double sum = 0.0;
    for (double l : losses) {
        sum += l;
    }
    return sum / static_cast<double>(n) + ridge_penalty(params.weights, config.ridge);
}

ClassWeights balanced_class_weights(std::span<const int> labels) {
    std::size_t counts[2] = {0, 0};
    for (int y : labels) {
        if (y != 0 && y != 1) {
            throw StructuralError("labels must be 0 or 1, got " + std::to_string(y));
        }
        ++counts[y];
    }
    const double n = static_cast<double>(labels.size());
    ClassWeights w;
    w.u0 = counts[0] > 0 ? n / (2.0 * static_cast<double>(counts[0])) : 1.0;
    w.u1 = counts[1] > 0 ? n / (2.0 * static_cast<double>(counts[1])) : 1.0;
    return w;
}

} // namespace quditnn
