#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "quditnn/generators.hpp"
#include "quditnn/linalg.hpp"
#include "quditnn/ranking.hpp"
#include "quditnn/record.hpp"

namespace quditnn {

/// Row-major so that a sample is a contiguous span.
using FeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class Readout { Parity, FirstTwo };
enum class ImportanceMode { SignedSum, MeanAbs };
/// Fixed map applied to each feature before it meets its weights.
/// NormalCdf sends a standardized value z to Phi(z) in (0, 1).
enum class InputMap { Identity, NormalCdf };

std::string_view to_string(Readout r);
std::string_view to_string(ImportanceMode m);
std::string_view to_string(InputMap m);
Readout parse_readout(std::string_view s);
ImportanceMode parse_importance_mode(std::string_view s);
InputMap parse_input_map(std::string_view s);

/// Generator slot driven by the constant input 1.0 instead of a feature.
inline constexpr int kBiasSlot = -1;

/// Weights and architecture of a single-qudit re-uploading network.
///
/// Every layer drives all d^2-1 generators. Slot s of a layer is fed by
/// feature `slot_feature[s]`, or by a constant 1.0 when that entry is
/// kBiasSlot. The coefficient of generator s in layer l is
/// remap(input_s * weights(l, s)).
struct ModelParams {
    std::size_t dim = 0;
    std::size_t layers = 0;
    Readout readout = Readout::Parity;
    InputMap input_map = InputMap::Identity;
    std::vector<int> slot_feature;
    RealMatrix weights; // layers x (dim^2 - 1)
    double decision_threshold = 0.5;

    /// Features in order on the first slots, remaining slots as bias.
    /// Throws StructuralError when dim^2-1 < num_features, dim < 2 or layers < 1.
    static ModelParams make(std::size_t dim, std::size_t layers, std::size_t num_features,
                            Readout readout = Readout::Parity);

    std::size_t num_generators() const { return dim * dim - 1; }
    std::size_t num_features() const;
    std::size_t parameter_count() const { return static_cast<std::size_t>(weights.size()); }

    /// Slot that carries feature `f`; throws StructuralError if none does.
    std::size_t slot_of_feature(std::size_t f) const;

    /// Throws StructuralError on inconsistent shapes or non-finite weights.
    void validate() const;
};

struct ClassDistribution {
    double q0 = 1.0;
    double q1 = 0.0;

    double operator[](int label) const { return label == 0 ? q0 : q1; }
};

/// Bounded angle map 2*atan(2z).
double remap(double z);
/// d/dz of remap: 4 / (1 + 4 z^2).
double remap_derivative(double z);

/// Per-slot inputs for one sample: mapped features placed by `slot_feature`,
/// 1.0 on bias slots.
RealVector slot_inputs(std::span<const double> features, const ModelParams &params);

/// sum_s remap(inputs_s * weights_s) G_s. Throws StructuralError on length mismatch.
ComplexMatrix layer_hamiltonian(std::span<const double> inputs, std::span<const double> weights,
                                const GeneratorSet &gs);

/// Same as layer_hamiltonian() but from precomputed generator coefficients.
ComplexMatrix hamiltonian_from_coefficients(std::span<const double> coefficients, const GeneratorSet &gs);

/// U_L ... U_1 |0>, layer 1 applied first.
QuditState forward_state(std::span<const double> features, const ModelParams &params, const GeneratorSet &gs);

/// Measurement probabilities p_k = |<k|psi_out>|^2.
RealVector forward(std::span<const double> features, const ModelParams &params, const GeneratorSet &gs);

/// Binary class distribution from basis-state probabilities.
///
/// parity:    q1 = sum of p_k over odd k, q0 = 1 - q1.
/// first-two: q_c = p_c / (p_0 + p_1); throws DegenerateReadoutError when
///            p_0 + p_1 < 1e-9.
ClassDistribution readout(std::span<const double> probs, Readout scheme);

inline constexpr double kFirstTwoFloor = 1e-9;

/// Empirical distribution of `shots` projective measurements. Throws
/// StructuralError when shots < 1.
RealVector sample_shots(std::span<const double> probs, long long shots, std::mt19937_64 &rng);
RealVector sample_shots(std::span<const double> probs, long long shots, std::uint64_t seed);

/// Per-feature importance from the accumulated layer weights.
///
/// SignedSum: |sum_l w_f^(l)|; MeanAbs: (1/L) sum_l |w_f^(l)|. Bias slots
/// are excluded; ties rank by ascending feature index.
RankedFeatureList feature_importance(const ModelParams &params, ImportanceMode mode = ImportanceMode::SignedSum);

/// Predicted label for a sample (q1 >= decision_threshold).
int predict(std::span<const double> features, const ModelParams &params, const GeneratorSet &gs);

Record to_record(const ModelParams &params);
ModelParams model_from_record(const Record &rec);

} // namespace quditnn
