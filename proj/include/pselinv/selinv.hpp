#pragma once

#include <optional>
#include <vector>

#include "pselinv/dense.hpp"
#include "pselinv/factor.hpp"
#include "pselinv/symbolic.hpp"

namespace pselinv {

/// Selected blocks of A^{-1} on the block layout of the factor:
/// diag = Ainv(K,K), lower[b] = Ainv(I_b,K), upper[b] = Ainv(K,I_b).
struct SupernodeBlocks {
    Dense diag;
    std::vector<Dense> lower;
    std::vector<Dense> upper;

    friend bool operator==(const SupernodeBlocks&, const SupernodeBlocks&) = default;
};

class SelInvResult {
public:
    SelInvResult() = default;
    /// Zero-filled blocks shaped after `layout`.
    explicit SelInvResult(BlockLayout layout);

    const BlockLayout& layout() const noexcept { return layout_; }
    Index count() const noexcept { return layout_.count(); }
    const SupernodeBlocks& snode(Index K) const { return snodes_[K]; }
    SupernodeBlocks& snode(Index K) { return snodes_[K]; }

    /// Entry (i, j) of A^{-1} if it is one of the selected positions.
    std::optional<double> entry(Index i, Index j) const;
    double max_abs() const noexcept;

    /// Visits every stored entry as (row, col, value).
    template <class F>
    void for_each(F&& f) const;

    bool bitwise_equal(const SelInvResult& other) const { return snodes_ == other.snodes_; }

private:
    BlockLayout layout_;
    std::vector<SupernodeBlocks> snodes_;
};

/// Largest |a - b| over all selected entries divided by max|b|, together
/// with the block where it occurs.
struct ResultDiff {
    double max_abs_diff = 0.0;
    double relative = 0.0;
    Index row = -1;
    Index col = -1;
};

/// Throws InputError if the two results have different block layouts.
ResultDiff compare_results(const SelInvResult& a, const SelInvResult& reference);

/// Backward sweep over supernodes computing every selected block from the
/// normalized factor. Throws InvariantError on an unnormalized factor or a
/// needed Ainv block that lies outside the fill pattern.
/// With Symmetry::Symmetric the factor must come from a symmetric matrix:
/// Uhat is taken as Lhat^T and the upper blocks as transposes of the lower.
enum class Symmetry { General, Symmetric };
SelInvResult selected_inversion(const SupFactorization& f, Symmetry symmetry = Symmetry::General);

/// Gathers Ainv(rows_a, rows_b) out of the stored block (Ia, Ib): the
/// diagonal block when Ia == Ib, the lower block of supernode Ib when
/// Ia > Ib, the upper block of supernode Ia otherwise.
Dense gather_from_block(const BlockLayout& layout, Index Ia, std::span<const Index> rows_a,
                        Index Ib, std::span<const Index> rows_b, const Dense& block);

/// U(K,K)^{-1} L(K,K)^{-1} by two triangular solves against the identity.
Dense inverse_of_diag_lu(const Dense& L_diag, const Dense& U_diag);

inline constexpr Index kOracleMaxDimension = 2000;

/// Full inverse by partially pivoted dense LU. Test/verification path only.
Dense dense_inverse_oracle(const SparseMatrix& A);

/// Copies the selected positions of a dense n-by-n matrix.
SelInvResult extract_selected(const Dense& dense, const FillPattern& fill,
                              const SupernodePartition& part);

template <class F>
void SelInvResult::for_each(F&& f) const
{
    const auto& part = layout_.partition();
    for (Index K = 0; K < count(); ++K) {
        const auto& sn = snodes_[K];
        const Index s = part.start(K);
        for (std::size_t c = 0; c < sn.diag.cols(); ++c)
            for (std::size_t r = 0; r < sn.diag.rows(); ++r)
                f(s + static_cast<Index>(r), s + static_cast<Index>(c), sn.diag(r, c));
        const auto& panel = layout_.panel(K);
        for (std::size_t b = 0; b < panel.blocks.size(); ++b) {
            auto rows = panel.block_rows(b);
            for (std::size_t c = 0; c < sn.lower[b].cols(); ++c)
                for (std::size_t r = 0; r < rows.size(); ++r) {
                    f(rows[r], s + static_cast<Index>(c), sn.lower[b](r, c));
                    f(s + static_cast<Index>(c), rows[r], sn.upper[b](c, r));
                }
        }
    }
}

}  // namespace pselinv
