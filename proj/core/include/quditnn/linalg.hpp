#pragma once

#include <complex>
#include <cstddef>

#include <Eigen/Dense>

namespace quditnn {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

inline constexpr double kHermitianTolerance = 1e-10;
inline constexpr double kNormTolerance = 1e-10;
inline constexpr double kUnitaryTolerance = 1e-8;

/// Pure state of a single d-level system, stored as its d amplitudes in the
/// computational basis. Always unit norm.
class QuditState {
  public:
    /// |k> for k in [0, dim).
    static QuditState basis(std::size_t dim, std::size_t k = 0);

    /// Throws PreconditionError when the amplitudes are not unit norm
    /// within kNormTolerance.
    static QuditState from_amplitudes(ComplexVector amplitudes);

    std::size_t dim() const { return static_cast<std::size_t>(amps_.size()); }
    const ComplexVector &amplitudes() const { return amps_; }
    Complex operator[](std::size_t k) const { return amps_(static_cast<Eigen::Index>(k)); }

    /// |<k|psi>|^2 for every k.
    RealVector probabilities() const;

  private:
    explicit QuditState(ComplexVector amps) : amps_(std::move(amps)) {}
    ComplexVector amps_;
};

/// Spectral decomposition H = V diag(eigenvalues) V^dagger of a Hermitian matrix.
struct EigenDecomposition {
    RealVector eigenvalues; // ascending
    ComplexMatrix eigenvectors; // columns, unitary

    std::size_t dim() const { return static_cast<std::size_t>(eigenvalues.size()); }
    ComplexMatrix reconstruct() const;
};

/// ||H - H^dagger||_F relative to ||H||_F, or absolute when ||H||_F < 1e-12.
double hermitian_defect(const ComplexMatrix &h);

bool all_finite(const ComplexMatrix &m);

/// Hermitian eigendecomposition. The input is symmetrized before
/// decomposition so that assembly round-off does not leak into the spectrum.
///
/// Throws PreconditionError for non-square, non-finite or non-Hermitian
/// input, and NumericalError if the QR iteration does not converge.
EigenDecomposition eigh(const ComplexMatrix &h);

/// exp(-i H) from an existing decomposition of H.
ComplexMatrix expm_minus_i(const EigenDecomposition &decomp);

/// exp(-i H) for Hermitian H, computed through eigh().
ComplexMatrix expm_minus_i(const ComplexMatrix &h);

/// U |psi>. Throws StructuralError on dimension mismatch and
/// PreconditionError when U is not unitary within kUnitaryTolerance.
QuditState apply_unitary(const ComplexMatrix &u, const QuditState &psi);

/// max_ij |(U^dagger U - I)_ij|.
double unitarity_defect(const ComplexMatrix &u);

} // namespace quditnn
