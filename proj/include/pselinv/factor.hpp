#pragma once

#include <vector>

#include "pselinv/dense.hpp"
#include "pselinv/sparse_matrix.hpp"
#include "pselinv/symbolic.hpp"

namespace pselinv {

/// Per-supernode pieces of the factor. `lower[b]` is L(I_b, K) over the
/// panel rows of block b; `upper[b]` is U(K, I_b) over the same indices
/// as columns. After normalization they hold L-hat and U-hat.
struct SupernodeFactor {
    Dense L_diag;  // unit lower triangular
    Dense U_diag;  // upper triangular, carries the pivots
    std::vector<Dense> lower;
    std::vector<Dense> upper;
};

class SupFactorization {
public:
    SupFactorization(BlockLayout layout, std::vector<SupernodeFactor> snodes)
        : layout_(std::move(layout)), snodes_(std::move(snodes)) {}

    const BlockLayout& layout() const noexcept { return layout_; }
    const SupernodeFactor& snode(Index K) const { return snodes_[K]; }
    SupernodeFactor& snode(Index K) { return snodes_[K]; }
    Index count() const noexcept { return layout_.count(); }
    bool normalized() const noexcept { return normalized_; }

    friend SupFactorization normalize_factors(SupFactorization f);
    friend void normalize_in_place(SupFactorization& f);

private:
    BlockLayout layout_;
    std::vector<SupernodeFactor> snodes_;
    bool normalized_ = false;
};

inline constexpr double kPivotTolerance = 1e-14;

/// Right-looking supernodal LU without pivoting. Throws FactorizationError
/// naming the global column of the first pivot with
/// |pivot| <= kPivotTolerance * max|A|.
SupFactorization supernodal_lu(const SparseMatrix& A, const SupernodePartition& part,
                               const FillPattern& fill);

/// L-hat = L(C,K) L(K,K)^{-1} and U-hat = U(K,K)^{-1} U(K,C) for every
/// supernode. Throws InvariantError when applied twice.
SupFactorization normalize_factors(SupFactorization f);
void normalize_in_place(SupFactorization& f);

}  // namespace pselinv
