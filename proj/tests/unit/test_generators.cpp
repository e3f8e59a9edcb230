#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "quditnn/errors.hpp"
#include "quditnn/generators.hpp"

using namespace quditnn;

namespace {

ComplexMatrix mat3(std::initializer_list<Complex> values) {
    ComplexMatrix m(3, 3);
    auto it = values.begin();
    for (Eigen::Index i = 0; i < 3; ++i) {
        for (Eigen::Index j = 0; j < 3; ++j) {
            m(i, j) = *it++;
        }
    }
    return m;
}

} // namespace

TEST(Generators, QubitGivesPauliMatrices) {
    const auto gs = build_generators(2);
    ASSERT_EQ(gs.size(), 3u);
    const Complex i{0.0, 1.0};
    ComplexMatrix sx(2, 2), sy(2, 2), sz(2, 2);
    sx << 0, 1, 1, 0;
    sy << 0, -i, i, 0;
    sz << 1, 0, 0, -1;
    EXPECT_EQ(gs[0].matrix, sx);
    EXPECT_EQ(gs[1].matrix, sy);
    EXPECT_EQ(gs[2].matrix, sz);
}

TEST(Generators, QutritGivesGellMannInAlgorithmOrder) {
    const Complex i{0.0, 1.0};
    const double r3 = 1.0 / std::sqrt(3.0);
    // Standard Gell-Mann lambda_1..lambda_8.
    const std::vector<ComplexMatrix> lambda = {
        mat3({0, 1, 0, 1, 0, 0, 0, 0, 0}),   mat3({0, -i, 0, i, 0, 0, 0, 0, 0}),
        mat3({1, 0, 0, 0, -1, 0, 0, 0, 0}),  mat3({0, 0, 1, 0, 0, 0, 1, 0, 0}),
        mat3({0, 0, -i, 0, 0, 0, i, 0, 0}),  mat3({0, 0, 0, 0, 0, 1, 0, 1, 0}),
        mat3({0, 0, 0, 0, 0, -i, 0, i, 0}),  mat3({r3, 0, 0, 0, r3, 0, 0, 0, -2 * r3}),
    };
    // R01, I01, R02, I02, R12, I12, D1, D2
    const std::vector<int> expected = {0, 1, 3, 4, 5, 6, 2, 7};
    const auto gs = build_generators(3);
    ASSERT_EQ(gs.size(), 8u);
    for (std::size_t k = 0; k < 8; ++k) {
        EXPECT_LT((gs[k].matrix - lambda[static_cast<std::size_t>(expected[k])]).norm(), 1e-15) << "k=" << k;
    }
}

TEST(Generators, CountsByKind) {
    const auto gs = build_generators(5);
    const auto r = check_algebra(gs);
    EXPECT_EQ(r.count, 24u);
    EXPECT_EQ(r.symmetric, 10u);
    EXPECT_EQ(r.antisymmetric, 10u);
    EXPECT_EQ(r.diagonal, 4u);
}

TEST(Generators, RejectsDimensionBelowTwo) {
    EXPECT_THROW(build_generators(1), StructuralError);
    EXPECT_THROW(build_generators(0), StructuralError);
}

TEST(Generators, AlgebraHoldsUpToSixteen) {
    for (std::size_t d = 2; d <= 16; ++d) {
        const auto gs = build_generators(d);
        ASSERT_EQ(gs.size(), d * d - 1);
        const auto r = check_algebra(gs);
        EXPECT_LT(r.max_abs_trace, 1e-14) << "d=" << d;
        EXPECT_LT(r.max_offdiag_overlap, 1e-12) << "d=" << d;
        EXPECT_LT(r.max_norm_deviation, 1e-12) << "d=" << d;
        EXPECT_EQ(r.max_hermitian_defect, 0.0) << "d=" << d;
        EXPECT_NEAR(r.alpha, 2.0, 1e-14);
    }
}

TEST(Generators, PauliAlgebraAtMachineZero) {
    const auto r = check_algebra(build_generators(2));
    EXPECT_EQ(r.max_abs_trace, 0.0);
    EXPECT_EQ(r.max_offdiag_overlap, 0.0);
    EXPECT_EQ(r.max_norm_deviation, 0.0);
    EXPECT_EQ(r.alpha, 2.0);
}

TEST(Generators, SparsityPattern) {
    for (std::size_t d = 2; d <= 8; ++d) {
        for (const auto &g : build_generators(d)) {
            const auto nnz = (g.matrix.array().abs() > 0.0).count();
            if (g.kind == GeneratorKind::Diagonal) {
                EXPECT_EQ(nnz, static_cast<Eigen::Index>(g.level + 1));
                EXPECT_EQ(g.entries.size(), g.level + 1);
            } else {
                EXPECT_EQ(nnz, 2);
                EXPECT_EQ(g.entries.size(), 2u);
            }
        }
    }
}

TEST(Generators, ShiftedDiagonalFormIsIdentical) {
    // Diagonal family indexed 0 <= l <= d-2 with factor sqrt(2/((l+2)(l+1)))
    // equals the canonical family under l -> l+1.
    for (std::size_t d = 2; d <= 10; ++d) {
        const auto gs = build_generators(d);
        const std::size_t first_diag = d * (d - 1);
        for (std::size_t l = 0; l + 2 <= d; ++l) {
            const auto n = static_cast<Eigen::Index>(d);
            ComplexMatrix text_form = ComplexMatrix::Zero(n, n);
            const double c = std::sqrt(2.0 / static_cast<double>((l + 2) * (l + 1)));
            for (std::size_t j = 0; j <= l; ++j) {
                text_form(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) = c;
            }
            text_form(static_cast<Eigen::Index>(l + 1), static_cast<Eigen::Index>(l + 1)) =
                -static_cast<double>(l + 1) * c;
            const auto &g = gs[first_diag + l];
            EXPECT_EQ(g.level, l + 1);
            EXPECT_LT((g.matrix - text_form).norm(), 1e-15) << "d=" << d << " l=" << l;
        }
    }
}
