#include "quditnn/generators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "quditnn/errors.hpp"

namespace quditnn {

std::string_view to_string(GeneratorKind kind) {
    switch (kind) {
    case GeneratorKind::SymmetricReal:
        return "symmetric-real";
    case GeneratorKind::AntisymmetricImag:
        return "antisymmetric-imag";
    case GeneratorKind::Diagonal:
        return "diagonal";
    }
    return "unknown";
}

namespace {

Generator make_generator(std::size_t d, GeneratorKind kind, std::vector<SparseEntry> entries) {
    Generator g;
    g.kind = kind;
    const auto n = static_cast<Eigen::Index>(d);
    g.matrix = ComplexMatrix::Zero(n, n);
    for (const auto &e : entries) {
        g.matrix(static_cast<Eigen::Index>(e.row), static_cast<Eigen::Index>(e.col)) = e.value;
    }
    g.entries = std::move(entries);
    return g;
}

} // namespace

GeneratorSet build_generators(std::size_t d) {
    if (d < 2) {
        throw StructuralError("su(d) generators need d >= 2, got d = " + std::to_string(d));
    }
    GeneratorSet gs;
    gs.dim_ = d;
    gs.gens_.reserve(d * d - 1);

    const Complex one{1.0, 0.0};
    const Complex i_unit{0.0, 1.0};
    for (std::size_t j = 0; j + 1 < d; ++j) {
        for (std::size_t k = j + 1; k < d; ++k) {
            auto re = make_generator(d, GeneratorKind::SymmetricReal, {{j, k, one}, {k, j, one}});
            re.row = j;
            re.col = k;
            gs.gens_.push_back(std::move(re));

            auto im = make_generator(d, GeneratorKind::AntisymmetricImag, {{j, k, -i_unit}, {k, j, i_unit}});
            im.row = j;
            im.col = k;
            gs.gens_.push_back(std::move(im));
        }
    }
    for (std::size_t l = 1; l < d; ++l) {
        const double scale = std::sqrt(2.0 / static_cast<double>(l * (l + 1)));
        std::vector<SparseEntry> entries;
        entries.reserve(l + 1);
        for (std::size_t m = 0; m < l; ++m) {
            entries.push_back({m, m, Complex{scale, 0.0}});
        }
        entries.push_back({l, l, Complex{-static_cast<double>(l) * scale, 0.0}});
        auto diag = make_generator(d, GeneratorKind::Diagonal, std::move(entries));
        diag.level = l;
        gs.gens_.push_back(std::move(diag));
    }
    return gs;
}

AlgebraReport check_algebra(const GeneratorSet &gs) {
    AlgebraReport r;
    r.dim = gs.dim();
    r.count = gs.size();
    for (const auto &g : gs) {
        switch (g.kind) {
        case GeneratorKind::SymmetricReal:
            ++r.symmetric;
            break;
        case GeneratorKind::AntisymmetricImag:
            ++r.antisymmetric;
            break;
        case GeneratorKind::Diagonal:
            ++r.diagonal;
            break;
        }
    }
    if (gs.size() == 0) {
        return r;
    }
    r.alpha = (gs[0].matrix * gs[0].matrix).trace().real();
    for (std::size_t i = 0; i < gs.size(); ++i) {
        const auto &gi = gs[i].matrix;
        r.max_abs_trace = std::max(r.max_abs_trace, std::abs(gi.trace()));
        r.max_hermitian_defect = std::max(r.max_hermitian_defect, (gi - gi.adjoint()).cwiseAbs().maxCoeff());
        for (std::size_t j = i; j < gs.size(); ++j) {
            // Hilbert-Schmidt product Tr(G_i^dagger G_j)
            const Complex overlap = (gi.adjoint() * gs[j].matrix).trace();
            if (i == j) {
                r.max_norm_deviation = std::max(r.max_norm_deviation, std::abs(overlap - kGeneratorNormalization));
            } else {
                r.max_offdiag_overlap = std::max(r.max_offdiag_overlap, std::abs(overlap));
            }
        }
    }
    return r;
}

} // namespace quditnn
