#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace quditnn {

/// Features ordered from most to least important, with their scores.
///
/// `order` is a permutation of 0..n-1 and `scores[i]` is the score of
/// `order[i]`; scores are non-negative and non-increasing.
struct RankedFeatureList {
    std::vector<std::size_t> order;
    std::vector<double> scores;

    std::size_t size() const { return order.size(); }

    /// Sorts feature indices by descending score, breaking ties by ascending
    /// index. Throws StructuralError on negative or non-finite scores.
    static RankedFeatureList from_scores(std::span<const double> scores_by_feature);

    /// Score of feature `f` (not of rank position `f`).
    double score_of(std::size_t feature) const;

    /// Throws StructuralError if the invariants do not hold.
    void validate() const;
};

} // namespace quditnn
