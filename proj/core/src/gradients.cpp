#include "quditnn/gradients.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "quditnn/errors.hpp"
#include "quditnn/parallel.hpp"

namespace quditnn {

namespace {

constexpr double kDegeneracyScale = 1e-9;

} // namespace

ComplexMatrix loewner_matrix(const RealVector &eigenvalues) {
    const Eigen::Index n = eigenvalues.size();
    const double eps = kDegeneracyScale * std::max(1.0, eigenvalues.cwiseAbs().maxCoeff());
    const Complex minus_i{0.0, -1.0};
    ComplexMatrix phi(n, n);
    for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index b = 0; b < n; ++b) {
            const double gap = eigenvalues(a) - eigenvalues(b);
            const double mid = 0.5 * (eigenvalues(a) + eigenvalues(b));
            if (std::abs(gap) < eps) {
                phi(a, b) = minus_i * std::polar(1.0, -mid);
            } else {
                // (e^{-i l_a} - e^{-i l_b}) / (l_a - l_b) = -2i e^{-i mid} sin(gap/2) / gap
                phi(a, b) = 2.0 * minus_i * std::polar(1.0, -mid) * (std::sin(0.5 * gap) / gap);
            }
        }
    }
    return phi;
}

ComplexMatrix frechet_expm(const EigenDecomposition &decomp, const ComplexMatrix &direction) {
    const auto d = static_cast<Eigen::Index>(decomp.dim());
    if (direction.rows() != d || direction.cols() != d) {
        throw StructuralError("direction must be " + std::to_string(d) + "x" + std::to_string(d));
    }
    if (hermitian_defect(direction) > kHermitianTolerance) {
        throw PreconditionError("Frechet direction is not Hermitian");
    }
    const ComplexMatrix &v = decomp.eigenvectors;
    const ComplexMatrix rotated = v.adjoint() * direction * v;
    const ComplexMatrix phi = loewner_matrix(decomp.eigenvalues);
    return v * phi.cwiseProduct(rotated) * v.adjoint();
}

LayerTape record_forward(std::span<const double> features, const ModelParams &params, const GeneratorSet &gs) {
    if (gs.dim() != params.dim || gs.size() != params.num_generators()) {
        throw StructuralError("generator set does not match model dimension");
    }
    const RealVector in = slot_inputs(features, params);
    const std::size_t n_gen = gs.size();
    LayerTape tape;
    tape.decompositions.reserve(params.layers);
    tape.inputs.reserve(params.layers);
    std::vector<double> coeff(n_gen);
    ComplexVector psi = QuditState::basis(params.dim, 0).amplitudes();
    for (std::size_t l = 0; l < params.layers; ++l) {
        for (std::size_t s = 0; s < n_gen; ++s) {
            coeff[s] = remap(in(static_cast<Eigen::Index>(s)) *
                             params.weights(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(s)));
        }
        EigenDecomposition eig = eigh(hamiltonian_from_coefficients(coeff, gs));
        ComplexVector rotated = eig.eigenvectors.adjoint() * psi;
        for (Eigen::Index a = 0; a < rotated.size(); ++a) {
            rotated(a) *= std::polar(1.0, -eig.eigenvalues(a));
        }
        tape.inputs.push_back(psi);
        psi = eig.eigenvectors * rotated;
        tape.decompositions.push_back(std::move(eig));
    }
    tape.output = std::move(psi);
    return tape;
}

double accumulate_sample_gradient(std::span<const double> features, int label, const ModelParams &params,
                                  const GeneratorSet &gs, const ClassWeights &weights, RealMatrix &grad) {
    const LayerTape tape = record_forward(features, params, gs);
    const RealVector probs = tape.output.cwiseAbs2();
    const std::span<const double> pspan(probs.data(), static_cast<std::size_t>(probs.size()));
    const double loss = cross_entropy(readout(pspan, params.readout), label, weights);

    // dL = 2 Re <costate, d psi>
    const RealVector dp = cross_entropy_probability_gradient(pspan, label, params.readout, weights);
    ComplexVector costate = dp.cast<Complex>().cwiseProduct(tape.output);

    const RealVector in = slot_inputs(features, params);
    for (std::size_t li = params.layers; li-- > 0;) {
        const auto l = static_cast<Eigen::Index>(li);
        const EigenDecomposition &eig = tape.decompositions[li];
        const ComplexMatrix &v = eig.eigenvectors;
        const ComplexVector a = v.adjoint() * costate;
        const ComplexVector b = v.adjoint() * tape.inputs[li];
        const ComplexMatrix phi = loewner_matrix(eig.eigenvalues);

        // <costate, Dexp[E] psi_in> = Tr(Y E) with Y = V K^T V^dagger,
        // K_ab = Phi_ab conj(a_a) b_b.
        ComplexMatrix kt(phi.rows(), phi.cols());
        for (Eigen::Index r = 0; r < phi.rows(); ++r) {
            for (Eigen::Index c = 0; c < phi.cols(); ++c) {
                kt(c, r) = phi(r, c) * std::conj(a(r)) * b(c);
            }
        }
        const ComplexMatrix y = v * kt * v.adjoint();

        for (std::size_t s = 0; s < gs.size(); ++s) {
            Complex tr{0.0, 0.0};
            for (const auto &e : gs[s].entries) {
                tr += y(static_cast<Eigen::Index>(e.col), static_cast<Eigen::Index>(e.row)) * e.value;
            }
            const double x = in(static_cast<Eigen::Index>(s));
            if (x == 0.0) {
                continue;
            }
            const double w = params.weights(l, static_cast<Eigen::Index>(s));
            grad(l, static_cast<Eigen::Index>(s)) += 2.0 * tr.real() * remap_derivative(x * w) * x;
        }

        // costate <- U_l^dagger costate
        ComplexVector back = a;
        for (Eigen::Index k = 0; k < back.size(); ++k) {
            back(k) *= std::polar(1.0, eig.eigenvalues(k));
        }
        costate = v * back;
    }
    return loss;
}

GradientRecord loss_gradient(const BatchRef &batch, const ModelParams &params, const GeneratorSet &gs,
                             const LossConfig &config, unsigned threads) {
    const std::size_t n = batch.size();
    if (n == 0) {
        throw StructuralError("gradient over an empty batch");
    }
    const auto rows = static_cast<Eigen::Index>(params.layers);
    const auto cols = static_cast<Eigen::Index>(params.num_generators());

    // Fixed-size chunks keep the reduction order independent of `threads`.
    constexpr std::size_t kChunk = 32;
    const std::size_t chunks = (n + kChunk - 1) / kChunk;
    std::vector<RealMatrix> partial(chunks, RealMatrix::Zero(rows, cols));
    std::vector<double> losses(n, 0.0);
    parallel_for(chunks, threads, [&](std::size_t c) {
        const std::size_t hi = std::min(n, (c + 1) * kChunk);
        for (std::size_t i = c * kChunk; i < hi; ++i) {
            losses[i] = accumulate_sample_gradient(batch.sample(i), batch.label(i), params, gs, config.class_weights,
                                                   partial[c]);
        }
    });

    GradientRecord rec;
    rec.gradient = RealMatrix::Zero(rows, cols);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(losses[i])) {
            std::ostringstream msg;
            msg << "non-finite loss at batch sample " << i << " (row " << batch.row(i) << ")";
            throw NumericalError(msg.str());
        }
        sum += losses[i];
    }
    for (const auto &p : partial) {
        rec.gradient += p;
    }
    rec.gradient /= static_cast<double>(n);
    rec.data_loss = sum / static_cast<double>(n);
    rec.loss = rec.data_loss + ridge_penalty(params.weights, config.ridge);
    if (config.ridge != 0.0) {
        rec.gradient += 2.0 * config.ridge * params.weights;
    }
    if (!rec.gradient.allFinite()) {
        throw NumericalError("gradient contains NaN or Inf");
    }
    return rec;
}

} // namespace quditnn
