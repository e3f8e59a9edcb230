#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "quditnn/ranking.hpp"

namespace quditnn {

/// Unweighted mean of the per-class F1 scores over the classes present in
/// `truth`. Throws StructuralError on empty or mismatched input and on
/// labels other than 0/1.
double macro_f1(std::span<const int> predictions, std::span<const int> truth);

enum class EditVariant {
    Levenshtein,            // insert / delete / substitute, unit cost
    OptimalStringAlignment, // Levenshtein + adjacent transposition
};

/// Edit distance between two symbol sequences.
std::size_t edit_distance(std::span<const std::size_t> a, std::span<const std::size_t> b,
                          EditVariant variant = EditVariant::Levenshtein);

/// Edit distance between the orders of two rankings. Throws StructuralError
/// when the rankings are not over the same feature universe.
std::size_t edit_distance(const RankedFeatureList &a, const RankedFeatureList &b,
                          EditVariant variant = EditVariant::Levenshtein);

/// Weighted interpretability score of the top-`k` features.
///
/// The top-k scores are normalized to unit sum (uniform 1/k when they sum
/// to zero); informative features add their weight, the others subtract
/// it. `k == 0` selects k = |informative|. Result lies in [-1, 1].
/// Throws StructuralError for an empty informative set or k > n.
double wis(const RankedFeatureList &ranking, std::span<const std::size_t> informative, std::size_t k = 0);

/// Mean WIS of uniformly random rankings with uniform scores.
double random_wis_baseline(std::size_t num_features, std::span<const std::size_t> informative, std::size_t k,
                           std::size_t trials, std::uint64_t seed);

/// `rank,feature_id,feature_name,score`, rank starting at 1.
void write_ranking_csv(std::ostream &out, const RankedFeatureList &ranking,
                       std::span<const std::string> feature_names);
RankedFeatureList read_ranking_csv(std::istream &in);

} // namespace quditnn
