#include "pselinv/factor.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "pselinv/errors.hpp"

namespace pselinv {

namespace {

std::size_t position_in(std::span<const Index> rows, Index row)
{
    auto it = std::lower_bound(rows.begin(), rows.end(), row);
    if (it == rows.end() || *it != row)
        throw InvariantError(fmt::format("row {} missing from the supernodal structure", row));
    return static_cast<std::size_t>(it - rows.begin());
}

/// Locates the stored block holding global entry rows of supernode I and
/// columns of supernode J, returning the block and local offsets.
struct Target {
    Dense* block;
    std::vector<std::size_t> rows;
    std::vector<std::size_t> cols;
};

Target locate(std::vector<SupernodeFactor>& work, const BlockLayout& layout, Index I,
              std::span<const Index> rows, Index J, std::span<const Index> cols)
{
    const auto& part = layout.partition();
    Target t;
    if (I == J) {
        t.block = &work[I].L_diag;
        for (Index r : rows) t.rows.push_back(static_cast<std::size_t>(r - part.start(I)));
        for (Index c : cols) t.cols.push_back(static_cast<std::size_t>(c - part.start(I)));
    } else if (I > J) {
        const auto& panel = layout.panel(J);
        const long b = panel.find(I);
        if (b < 0) throw InvariantError(fmt::format("block L({}, {}) missing", I, J));
        t.block = &work[J].lower[b];
        for (Index r : rows) t.rows.push_back(position_in(panel.block_rows(b), r));
        for (Index c : cols) t.cols.push_back(static_cast<std::size_t>(c - part.start(J)));
    } else {
        const auto& panel = layout.panel(I);
        const long b = panel.find(J);
        if (b < 0) throw InvariantError(fmt::format("block U({}, {}) missing", I, J));
        t.block = &work[I].upper[b];
        for (Index r : rows) t.rows.push_back(static_cast<std::size_t>(r - part.start(I)));
        for (Index c : cols) t.cols.push_back(position_in(panel.block_rows(b), c));
    }
    return t;
}

}  // namespace

SupFactorization supernodal_lu(const SparseMatrix& A, const SupernodePartition& part,
                               const FillPattern& fill)
{
    if (A.n() != part.n() || A.n() != fill.n())
        throw InputError("matrix, partition and fill pattern sizes differ");
    if (!A.is_pattern_symmetric())
        throw InputError("supernodal LU requires a structurally symmetric pattern");

    BlockLayout layout(fill, part);
    const Index N = part.count();
    std::vector<SupernodeFactor> work(static_cast<std::size_t>(N));
    for (Index K = 0; K < N; ++K) {
        const auto w = static_cast<std::size_t>(part.width(K));
        const auto& panel = layout.panel(K);
        work[K].L_diag = Dense(w, w);  // packed LU workspace until K is factored
        for (const auto& blk : panel.blocks) {
            work[K].lower.emplace_back(blk.count, w);
            work[K].upper.emplace_back(w, blk.count);
        }
    }

    // scatter A into the block structure
    for (Index j = 0; j < A.n(); ++j) {
        const Index J = part.snode_of(j);
        auto rows = A.column_rows(j);
        auto vals = A.column_values(j);
        for (std::size_t p = 0; p < rows.size(); ++p) {
            const Index i = rows[p];
            const Index I = part.snode_of(i);
            const Index one_row[] = {i};
            const Index one_col[] = {j};
            Target t = locate(work, layout, I, one_row, J, one_col);
            (*t.block)(t.rows[0], t.cols[0]) = vals[p];
        }
    }

    const double tol = kPivotTolerance * A.max_abs();
    for (Index K = 0; K < N; ++K) {
        SupernodeFactor& sn = work[K];
        Dense packed = std::move(sn.L_diag);
        const long bad = lu_nopivot(packed, tol);
        if (bad >= 0) {
            const Index col = part.start(K) + bad;
            throw FactorizationError(
                fmt::format("zero or tiny pivot at column {} (|pivot| <= {:.3e})", col, tol), col);
        }
        split_lu(packed, sn.L_diag, sn.U_diag);
        for (auto& L : sn.lower) solve_right_upper(L, sn.U_diag);
        for (auto& U : sn.upper) solve_left_unit_lower(sn.L_diag, U);

        // Schur complement update of every (row block, col block) pair
        const auto& panel = layout.panel(K);
        for (std::size_t a = 0; a < panel.blocks.size(); ++a) {
            const Index I = panel.blocks[a].snode;
            auto ra = panel.block_rows(a);
            for (std::size_t b = 0; b < panel.blocks.size(); ++b) {
                const Index J = panel.blocks[b].snode;
                auto rb = panel.block_rows(b);
                Dense prod(ra.size(), rb.size());
                gemm(1.0, sn.lower[a], Op::None, sn.upper[b], Op::None, prod);
                Target t = locate(work, layout, I, ra, J, rb);
                for (std::size_t c = 0; c < rb.size(); ++c)
                    for (std::size_t r = 0; r < ra.size(); ++r)
                        (*t.block)(t.rows[r], t.cols[c]) -= prod(r, c);
            }
        }
    }
    return SupFactorization(std::move(layout), std::move(work));
}

void normalize_in_place(SupFactorization& f)
{
    if (f.normalized_) throw InvariantError("factorization is already normalized");
    for (auto& sn : f.snodes_) {
        for (auto& L : sn.lower) solve_right_unit_lower(L, sn.L_diag);
        for (auto& U : sn.upper) solve_left_upper(sn.U_diag, U);
    }
    f.normalized_ = true;
}

SupFactorization normalize_factors(SupFactorization f)
{
    normalize_in_place(f);
    return f;
}

}  // namespace pselinv
