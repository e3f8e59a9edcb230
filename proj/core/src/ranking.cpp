#include "quditnn/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "quditnn/errors.hpp"

namespace quditnn {

RankedFeatureList RankedFeatureList::from_scores(std::span<const double> scores_by_feature) {
    for (std::size_t f = 0; f < scores_by_feature.size(); ++f) {
        const double s = scores_by_feature[f];
        if (!std::isfinite(s) || s < 0.0) {
            throw StructuralError("importance score of feature " + std::to_string(f) +
                                  " must be finite and non-negative");
        }
    }
    RankedFeatureList r;
    r.order.resize(scores_by_feature.size());
    std::iota(r.order.begin(), r.order.end(), std::size_t{0});
    std::stable_sort(r.order.begin(), r.order.end(), [&](std::size_t a, std::size_t b) {
        return scores_by_feature[a] > scores_by_feature[b];
    });
    r.scores.reserve(r.order.size());
    for (auto f : r.order) {
        r.scores.push_back(scores_by_feature[f]);
    }
    return r;
}

double RankedFeatureList::score_of(std::size_t feature) const {
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (order[i] == feature) {
            return scores[i];
        }
    }
    throw StructuralError("feature " + std::to_string(feature) + " is not part of the ranking");
}

void RankedFeatureList::validate() const {
    if (order.size() != scores.size()) {
        throw StructuralError("ranking has " + std::to_string(order.size()) + " features but " +
                              std::to_string(scores.size()) + " scores");
    }
    std::vector<bool> seen(order.size(), false);
    for (auto f : order) {
        if (f >= order.size() || seen[f]) {
            throw StructuralError("ranking order is not a permutation");
        }
        seen[f] = true;
    }
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!std::isfinite(scores[i]) || scores[i] < 0.0) {
            throw StructuralError("ranking scores must be finite and non-negative");
        }
        if (i > 0 && scores[i] > scores[i - 1]) {
            throw StructuralError("ranking scores must be non-increasing");
        }
    }
}

} // namespace quditnn
