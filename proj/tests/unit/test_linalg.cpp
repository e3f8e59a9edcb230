#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "quditnn/errors.hpp"
#include "quditnn/linalg.hpp"
#include "test_support.hpp"

using namespace quditnn;
using quditnn::testing::random_hermitian;
using quditnn::testing::relative_frobenius;

namespace {

ComplexMatrix sigma_x() {
    ComplexMatrix m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

} // namespace

TEST(Eigh, IdentityHasUnitSpectrum) {
    const auto eig = eigh(ComplexMatrix::Identity(3, 3));
    for (Eigen::Index a = 0; a < 3; ++a) {
        EXPECT_NEAR(eig.eigenvalues(a), 1.0, 1e-14);
    }
    EXPECT_LT(unitarity_defect(eig.eigenvectors), 1e-12);
    EXPECT_LT(relative_frobenius(eig.reconstruct(), ComplexMatrix::Identity(3, 3)), 1e-12);
}

TEST(Eigh, DiagonalInputSortedAscending) {
    ComplexMatrix h = ComplexMatrix::Zero(2, 2);
    h(0, 0) = 2.0;
    h(1, 1) = -1.0;
    const auto eig = eigh(h);
    EXPECT_NEAR(eig.eigenvalues(0), -1.0, 1e-14);
    EXPECT_NEAR(eig.eigenvalues(1), 2.0, 1e-14);
    // eigenvectors are basis vectors up to phase
    EXPECT_NEAR(std::abs(eig.eigenvectors(1, 0)), 1.0, 1e-14);
    EXPECT_NEAR(std::abs(eig.eigenvectors(0, 1)), 1.0, 1e-14);
}

TEST(Eigh, PauliX) {
    const auto eig = eigh(sigma_x());
    EXPECT_NEAR(eig.eigenvalues(0), -1.0, 1e-14);
    EXPECT_NEAR(eig.eigenvalues(1), 1.0, 1e-14);
}

TEST(Eigh, RandomReconstructionAndUnitarity) {
    std::mt19937_64 rng(7);
    for (std::size_t d : {2u, 3u, 5u, 8u, 16u}) {
        const ComplexMatrix h = random_hermitian(d, rng);
        const auto eig = eigh(h);
        EXPECT_LT(relative_frobenius(eig.reconstruct(), h), 1e-10) << "d=" << d;
        EXPECT_LT(unitarity_defect(eig.eigenvectors), 1e-10) << "d=" << d;
        for (Eigen::Index a = 1; a < eig.eigenvalues.size(); ++a) {
            EXPECT_LE(eig.eigenvalues(a - 1), eig.eigenvalues(a));
        }
    }
}

TEST(Eigh, RejectsNonHermitian) {
    ComplexMatrix h = sigma_x();
    h(0, 1) = 2.0;
    EXPECT_THROW(eigh(h), PreconditionError);
}

TEST(Eigh, RejectsNonFinite) {
    ComplexMatrix h = sigma_x();
    h(0, 0) = std::nan("");
    EXPECT_THROW(eigh(h), PreconditionError);
}

TEST(Eigh, ToleratesAssemblyRoundoff) {
    ComplexMatrix h = sigma_x();
    h(0, 1) += 1e-13;
    EXPECT_NO_THROW(eigh(h));
}

TEST(ExpmMinusI, ZeroIsIdentity) {
    const ComplexMatrix u = expm_minus_i(ComplexMatrix::Zero(5, 5));
    EXPECT_LT((u - ComplexMatrix::Identity(5, 5)).norm(), 1e-14);
}

TEST(ExpmMinusI, DiagonalPiGivesMinusIdentity) {
    ComplexMatrix h = ComplexMatrix::Zero(2, 2);
    h(0, 0) = std::numbers::pi;
    h(1, 1) = -std::numbers::pi;
    const ComplexMatrix u = expm_minus_i(h);
    EXPECT_LT((u + ComplexMatrix::Identity(2, 2)).norm(), 1e-14);
}

TEST(ExpmMinusI, HalfPiSigmaX) {
    const ComplexMatrix u = expm_minus_i(0.5 * std::numbers::pi * sigma_x());
    const ComplexMatrix want = Complex{0.0, -1.0} * sigma_x();
    EXPECT_LT((u - want).norm(), 1e-14);
}

TEST(ExpmMinusI, MatchesTaylorOracle) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const ComplexMatrix h = random_hermitian(5, rng, 2.0);
        EXPECT_LT(relative_frobenius(expm_minus_i(h), quditnn::testing::expm_taylor(h)), 1e-12);
    }
}

TEST(ExpmMinusI, InverseCommutesAndComposes) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const ComplexMatrix h = random_hermitian(5, rng);
        const ComplexMatrix u = expm_minus_i(h);
        const ComplexMatrix u_inv = expm_minus_i(ComplexMatrix(-h));
        EXPECT_LT((u * u_inv - ComplexMatrix::Identity(5, 5)).norm(), 1e-10);
        EXPECT_LT((u * h - h * u).norm(), 1e-9 * h.norm());
        EXPECT_LT(unitarity_defect(u), 1e-10);

        // commuting pair sharing an eigenbasis
        const auto eig = eigh(h);
        RealVector la = RealVector::Random(5);
        RealVector lb = RealVector::Random(5);
        const ComplexMatrix a = eig.eigenvectors * la.cast<Complex>().asDiagonal() * eig.eigenvectors.adjoint();
        const ComplexMatrix b = eig.eigenvectors * lb.cast<Complex>().asDiagonal() * eig.eigenvectors.adjoint();
        EXPECT_LT((expm_minus_i(a) * expm_minus_i(b) - expm_minus_i(ComplexMatrix(a + b))).norm(), 1e-10);
    }
}

TEST(Apply, IdentityKeepsBasisState) {
    const auto psi = apply_unitary(ComplexMatrix::Identity(3, 3), QuditState::basis(3, 0));
    EXPECT_EQ(psi[0], Complex(1.0, 0.0));
    EXPECT_EQ(psi[1], Complex(0.0, 0.0));
}

TEST(Apply, MinusISigmaXFlips) {
    const ComplexMatrix u = Complex{0.0, -1.0} * sigma_x();
    const auto psi = apply_unitary(u, QuditState::basis(2, 0));
    EXPECT_NEAR(std::abs(psi[0]), 0.0, 1e-15);
    EXPECT_NEAR(psi[1].real(), 0.0, 1e-15);
    EXPECT_NEAR(psi[1].imag(), -1.0, 1e-15);
}

TEST(Apply, RandomUnitaryPreservesNorm) {
    std::mt19937_64 rng(5);
    ComplexVector v(5);
    std::normal_distribution<double> n;
    for (Eigen::Index i = 0; i < 5; ++i) {
        v(i) = Complex{n(rng), n(rng)};
    }
    const auto psi = QuditState::from_amplitudes(v / v.norm());
    const auto out = apply_unitary(expm_minus_i(random_hermitian(5, rng)), psi);
    EXPECT_NEAR(out.amplitudes().squaredNorm(), 1.0, 1e-10);
}

TEST(Apply, DimensionMismatchIsStructural) {
    EXPECT_THROW(apply_unitary(ComplexMatrix::Identity(3, 3), QuditState::basis(2, 0)), StructuralError);
}

TEST(Apply, NonUnitaryRejected) {
    EXPECT_THROW(apply_unitary(2.0 * ComplexMatrix::Identity(2, 2), QuditState::basis(2, 0)), PreconditionError);
}

TEST(QuditState, RejectsUnnormalized) {
    ComplexVector v = ComplexVector::Ones(2);
    EXPECT_THROW(QuditState::from_amplitudes(v), PreconditionError);
}
