#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "pselinv/dense.hpp"

namespace pselinv {

using Index = std::int64_t;

/// Square compressed-sparse-column matrix with sorted, duplicate-free
/// row indices in every column.
class SparseMatrix {
public:
    SparseMatrix() = default;

    /// Builds a CSC matrix from coordinate triplets. Duplicates are summed.
    /// Throws InputError on out-of-range indices.
    static SparseMatrix from_triplets(Index n, std::span<const Index> rows,
                                      std::span<const Index> cols,
                                      std::span<const double> vals);

    /// Adopts already-compressed arrays after validating the CSC invariants.
    static SparseMatrix from_csc(Index n, std::vector<Index> col_ptr,
                                 std::vector<Index> row_idx, std::vector<double> values);

    Index n() const noexcept { return n_; }
    Index nnz() const noexcept { return static_cast<Index>(row_idx_.size()); }

    std::span<const Index> col_ptr() const noexcept { return col_ptr_; }
    std::span<const Index> row_idx() const noexcept { return row_idx_; }
    std::span<const double> values() const noexcept { return values_; }

    std::span<const Index> column_rows(Index j) const;
    std::span<const double> column_values(Index j) const;

    /// Value at (i, j); zero when the position is not stored.
    double at(Index i, Index j) const;
    bool has_entry(Index i, Index j) const;

    double max_abs() const noexcept;
    bool is_pattern_symmetric() const;
    /// Bitwise A(i,j) == A(j,i) on a symmetric pattern.
    bool is_numerically_symmetric() const;

    Dense to_dense() const;

    /// P A P^T where perm[new] = old.
    SparseMatrix permuted(std::span<const Index> perm) const;

    friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;

private:
    Index n_ = 0;
    std::vector<Index> col_ptr_{0};
    std::vector<Index> row_idx_;
    std::vector<double> values_;
};

/// Pattern union of A and A^T. New positions carry explicit zeros.
SparseMatrix symmetrize_pattern(const SparseMatrix& A);

// Deterministic test-matrix generators.

/// 5-point Laplacian on an nx-by-ny grid, natural row-major numbering.
SparseMatrix gen_laplacian_2d(Index nx, Index ny);
/// Tridiagonal with `diag` on the diagonal and `off` on both off-diagonals.
SparseMatrix gen_tridiagonal(Index n, double diag = 4.0, double off = -1.0);
/// Diagonal plus a dense last row and column.
SparseMatrix gen_arrow(Index n);
/// Random structurally symmetric pattern with random values, made strictly
/// diagonally dominant by row. Values are symmetric iff `symmetric`.
SparseMatrix gen_random_diag_dominant(Index n, double density, std::uint64_t seed,
                                      bool symmetric);

// Matrix Market coordinate I/O.

SparseMatrix read_matrix_market(const std::filesystem::path& path);
void write_matrix_market(const SparseMatrix& A, const std::filesystem::path& path);

}  // namespace pselinv
