#include "quditnn/linalg.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "quditnn/errors.hpp"

namespace quditnn {

QuditState QuditState::basis(std::size_t dim, std::size_t k) {
    if (dim == 0 || k >= dim) {
        throw StructuralError("basis state |" + std::to_string(k) + "> does not exist in dimension " +
                              std::to_string(dim));
    }
    ComplexVector amps = ComplexVector::Zero(static_cast<Eigen::Index>(dim));
    amps(static_cast<Eigen::Index>(k)) = 1.0;
    return QuditState(std::move(amps));
}

QuditState QuditState::from_amplitudes(ComplexVector amplitudes) {
    if (amplitudes.size() == 0) {
        throw StructuralError("qudit state needs at least one amplitude");
    }
    const double norm2 = amplitudes.squaredNorm();
    if (!std::isfinite(norm2) || std::abs(norm2 - 1.0) > kNormTolerance) {
        std::ostringstream msg;
        msg << "qudit state is not normalized: sum |c_k|^2 = " << norm2;
        throw PreconditionError(msg.str());
    }
    return QuditState(std::move(amplitudes));
}

RealVector QuditState::probabilities() const { return amps_.cwiseAbs2(); }

ComplexMatrix EigenDecomposition::reconstruct() const {
    return eigenvectors * eigenvalues.cast<Complex>().asDiagonal() * eigenvectors.adjoint();
}

double hermitian_defect(const ComplexMatrix &h) {
    const double diff = (h - h.adjoint()).norm();
    const double scale = h.norm();
    return scale < 1e-12 ? diff : diff / scale;
}

bool all_finite(const ComplexMatrix &m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag())) {
                return false;
            }
        }
    }
    return true;
}

EigenDecomposition eigh(const ComplexMatrix &h) {
    if (h.rows() != h.cols() || h.rows() == 0) {
        throw PreconditionError("eigh needs a non-empty square matrix, got " + std::to_string(h.rows()) + "x" +
                                std::to_string(h.cols()));
    }
    if (!all_finite(h)) {
        throw PreconditionError("eigh input contains NaN or Inf");
    }
    const double defect = hermitian_defect(h);
    if (defect > kHermitianTolerance) {
        std::ostringstream msg;
        msg << "eigh input is not Hermitian (defect " << defect << " > " << kHermitianTolerance << ")";
        throw PreconditionError(msg.str());
    }
    const ComplexMatrix sym = 0.5 * (h + h.adjoint());
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(sym, Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success) {
        using Solver = Eigen::SelfAdjointEigenSolver<ComplexMatrix>;
        std::ostringstream msg;
        msg << "eigh did not converge within " << Solver::m_maxIterations * h.rows()
            << " QR iterations (dimension " << h.rows() << ")";
        throw NumericalError(msg.str());
    }
    return EigenDecomposition{solver.eigenvalues(), solver.eigenvectors()};
}

ComplexMatrix expm_minus_i(const EigenDecomposition &decomp) {
    const Eigen::Index n = decomp.eigenvalues.size();
    ComplexVector phases(n);
    for (Eigen::Index a = 0; a < n; ++a) {
        phases(a) = std::polar(1.0, -decomp.eigenvalues(a));
    }
    return decomp.eigenvectors * phases.asDiagonal() * decomp.eigenvectors.adjoint();
}

ComplexMatrix expm_minus_i(const ComplexMatrix &h) { return expm_minus_i(eigh(h)); }

double unitarity_defect(const ComplexMatrix &u) {
    const ComplexMatrix g = u.adjoint() * u - ComplexMatrix::Identity(u.rows(), u.cols());
    return g.cwiseAbs().maxCoeff();
}

QuditState apply_unitary(const ComplexMatrix &u, const QuditState &psi) {
    const auto d = static_cast<Eigen::Index>(psi.dim());
    if (u.rows() != d || u.cols() != d) {
        throw StructuralError("cannot apply a " + std::to_string(u.rows()) + "x" + std::to_string(u.cols()) +
                              " operator to a state of dimension " + std::to_string(d));
    }
    if (unitarity_defect(u) > kUnitaryTolerance) {
        throw PreconditionError("operator is not unitary within tolerance");
    }
    return QuditState::from_amplitudes(u * psi.amplitudes());
}

} // namespace quditnn
