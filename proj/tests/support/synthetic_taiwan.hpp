#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include "quditnn/data.hpp"

namespace quditnn::testing {

/// Taiwan-schema stand-in: 23 standard-normal features (two decimals) and a
/// label drawn from a logistic model on features 0, 5, 6 and 17. About a
/// quarter of the rows are positive. Not split.
inline Dataset synthetic_taiwan(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Dataset ds;
    ds.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(kTaiwanFeatureNames.size()));
    for (const auto name : kTaiwanFeatureNames) {
        ds.feature_names.emplace_back(name);
    }
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        for (Eigen::Index c = 0; c < ds.features.cols(); ++c) {
            ds.features(r, c) = std::round(z(rng) * 100.0) / 100.0;
        }
        const double logit = -1.6 + 1.8 * ds.features(r, 5) + 0.8 * ds.features(r, 6) - 0.6 * ds.features(r, 0) +
                             0.4 * ds.features(r, 17);
        ds.labels.push_back(u(rng) < 1.0 / (1.0 + std::exp(-logit)) ? 1 : 0);
    }
    return ds;
}

} // namespace quditnn::testing
