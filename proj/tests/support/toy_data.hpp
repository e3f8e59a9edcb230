#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>

#include "quditnn/data.hpp"

namespace quditnn::testing {

/// Points uniform in [lo, hi]^2 labelled by the sign of `margin`, rejecting
/// those with |margin(x)| < gap. Rows are split 70/15/15 stratified (not
/// standardized).
inline Dataset toy_dataset(std::size_t n, std::uint64_t seed, const std::function<double(double, double)> &margin,
                           double gap = 0.1, double lo = -1.0, double hi = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    Dataset ds;
    ds.features.resize(static_cast<Eigen::Index>(n), 2);
    std::size_t i = 0;
    while (i < n) {
        const double a = u(rng);
        const double b = u(rng);
        const double m = margin(a, b);
        if (std::abs(m) < gap) {
            continue;
        }
        ds.features(static_cast<Eigen::Index>(i), 0) = a;
        ds.features(static_cast<Eigen::Index>(i), 1) = b;
        ds.labels.push_back(m > 0.0 ? 1 : 0);
        ++i;
    }
    ds.feature_names = {"x0", "x1"};
    return stratified_split(ds, kDefaultSplitRatios, seed + 1);
}

/// Linearly separable on the unit square: label = [x0 > x1].
///
/// A single qubit with one bias slot has p(-x) = p(x), so the set must not
/// contain mirrored points with opposite labels.
inline Dataset separable_toy(std::size_t n = 400, std::uint64_t seed = 1) {
    return toy_dataset(n, seed, [](double a, double b) { return a - b; }, 0.05, 0.0, 1.0);
}

/// XOR quadrants: label = [x0 * x1 > 0].
inline Dataset xor_toy(std::size_t n = 800, std::uint64_t seed = 2) {
    return toy_dataset(n, seed, [](double a, double b) { return a * b; }, 0.02);
}

} // namespace quditnn::testing
