#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "quditnn/linalg.hpp"

namespace quditnn {

enum class GeneratorKind { SymmetricReal, AntisymmetricImag, Diagonal };

std::string_view to_string(GeneratorKind kind);

/// One nonzero entry of a generator matrix.
struct SparseEntry {
    std::size_t row;
    std::size_t col;
    Complex value;
};

struct Generator {
    GeneratorKind kind;
    // (row, col) pair for off-diagonal generators; `level` for diagonal ones
    // (1 <= level <= d-1, covering the first level+1 basis states).
    std::size_t row = 0;
    std::size_t col = 0;
    std::size_t level = 0;
    ComplexMatrix matrix;
    std::vector<SparseEntry> entries;
};

/// The d^2-1 traceless Hermitian generators of su(d), in the canonical
/// enumeration: for each pair j<k the real-symmetric generator followed by
/// the imaginary-antisymmetric one, then the diagonal generators by level.
/// Normalized so that Tr(G_i G_j) = 2 delta_ij.
class GeneratorSet {
  public:
    std::size_t dim() const { return dim_; }
    std::size_t size() const { return gens_.size(); }
    const Generator &operator[](std::size_t i) const { return gens_[i]; }
    const std::vector<Generator> &generators() const { return gens_; }

    auto begin() const { return gens_.begin(); }
    auto end() const { return gens_.end(); }

  private:
    friend GeneratorSet build_generators(std::size_t d);
    std::size_t dim_ = 0;
    std::vector<Generator> gens_;
};

/// Throws StructuralError for d < 2.
GeneratorSet build_generators(std::size_t d);

/// Tr(G_i G_i) for every generator of the canonical set.
inline constexpr double kGeneratorNormalization = 2.0;

struct AlgebraReport {
    std::size_t dim = 0;
    std::size_t count = 0;
    std::size_t symmetric = 0;
    std::size_t antisymmetric = 0;
    std::size_t diagonal = 0;
    double max_abs_trace = 0.0;
    double max_offdiag_overlap = 0.0;  // max_{i != j} |Tr(G_i G_j)|
    double max_norm_deviation = 0.0;   // max_i |Tr(G_i^2) - 2|
    double max_hermitian_defect = 0.0; // max entrywise |G - G^dagger|
    double alpha = 0.0;                // Tr(G_0^2)
};

/// Brute-force pairwise trace check of the algebra.
AlgebraReport check_algebra(const GeneratorSet &gs);

} // namespace quditnn
