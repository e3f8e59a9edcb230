#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "quditnn/generators.hpp"
#include "quditnn/linalg.hpp"
#include "quditnn/loss.hpp"
#include "quditnn/model.hpp"

namespace quditnn {

/// Directional derivative D exp(-iH)[E] at H = V diag(lambda) V^dagger,
/// using the divided-difference (Loewner) matrix of f(x) = exp(-ix).
/// Throws PreconditionError when E is not Hermitian.
ComplexMatrix frechet_expm(const EigenDecomposition &decomp, const ComplexMatrix &direction);

/// Loewner matrix Phi_ab = (f(l_a) - f(l_b)) / (l_a - l_b), with the
/// derivative f'(l_a) = -i exp(-i l_a) on (near-)coincident eigenvalues.
ComplexMatrix loewner_matrix(const RealVector &eigenvalues);

/// Cached forward pass of one sample.
struct LayerTape {
    std::vector<EigenDecomposition> decompositions; // of H_l
    std::vector<ComplexVector> inputs;              // psi_{l-1}
    ComplexVector output;                           // psi_L
};

LayerTape record_forward(std::span<const double> features, const ModelParams &params, const GeneratorSet &gs);

struct GradientRecord {
    RealMatrix gradient; // layers x n_gen, d loss / d w
    double loss = 0.0;   // mean weighted cross-entropy + ridge
    double data_loss = 0.0;
};

/// Gradient of one sample's weighted cross-entropy (no ridge term),
/// accumulated into `grad`. Returns the sample loss.
double accumulate_sample_gradient(std::span<const double> features, int label, const ModelParams &params,
                                  const GeneratorSet &gs, const ClassWeights &weights, RealMatrix &grad);

/// Mean weighted cross-entropy + ridge over the batch and its exact gradient.
///
/// Forward pass caches each layer's eigendecomposition and input state;
/// the backward pass propagates the co-state through U_l^dagger and maps
/// the adjoint of the Frechet derivative onto each generator. `threads`
/// only affects speed: per-sample results are reduced in row order.
/// Throws NumericalError naming the sample when its loss is not finite.
GradientRecord loss_gradient(const BatchRef &batch, const ModelParams &params, const GeneratorSet &gs,
                             const LossConfig &config, unsigned threads = 1);

} // namespace quditnn
