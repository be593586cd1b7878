#include "pselinv/selinv.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "pselinv/errors.hpp"

namespace pselinv {

namespace {

std::vector<std::size_t> positions_in(std::span<const Index> stored, std::span<const Index> wanted)
{
    std::vector<std::size_t> out;
    out.reserve(wanted.size());
    for (Index r : wanted) {
        auto it = std::lower_bound(stored.begin(), stored.end(), r);
        if (it == stored.end() || *it != r)
            throw InvariantError(fmt::format("needed Ainv entry on row/col {} lies outside the fill", r));
        out.push_back(static_cast<std::size_t>(it - stored.begin()));
    }
    return out;
}

std::vector<std::size_t> offsets_from(std::span<const Index> idx, Index start)
{
    std::vector<std::size_t> out;
    out.reserve(idx.size());
    for (Index r : idx) out.push_back(static_cast<std::size_t>(r - start));
    return out;
}

}  // namespace

SelInvResult::SelInvResult(BlockLayout layout) : layout_(std::move(layout))
{
    const auto& part = layout_.partition();
    snodes_.resize(static_cast<std::size_t>(layout_.count()));
    for (Index K = 0; K < layout_.count(); ++K) {
        const auto w = static_cast<std::size_t>(part.width(K));
        auto& sn = snodes_[K];
        sn.diag = Dense(w, w);
        for (const auto& blk : layout_.panel(K).blocks) {
            sn.lower.emplace_back(blk.count, w);
            sn.upper.emplace_back(w, blk.count);
        }
    }
}

std::optional<double> SelInvResult::entry(Index i, Index j) const
{
    const auto& part = layout_.partition();
    if (i < 0 || j < 0 || i >= part.n() || j >= part.n()) return std::nullopt;
    const Index I = part.snode_of(i);
    const Index J = part.snode_of(j);
    if (I == J) return snodes_[I].diag(i - part.start(I), j - part.start(I));
    const bool lower = I > J;
    const Index K = lower ? J : I;
    const Index other = lower ? I : J;
    const auto& panel = layout_.panel(K);
    const long b = panel.find(other);
    if (b < 0) return std::nullopt;
    auto rows = panel.block_rows(b);
    const Index outer = lower ? i : j;
    auto it = std::lower_bound(rows.begin(), rows.end(), outer);
    if (it == rows.end() || *it != outer) return std::nullopt;
    const auto r = static_cast<std::size_t>(it - rows.begin());
    if (lower) return snodes_[K].lower[b](r, j - part.start(K));
    return snodes_[K].upper[b](i - part.start(K), r);
}

double SelInvResult::max_abs() const noexcept
{
    double m = 0.0;
    for (const auto& sn : snodes_) {
        m = std::max(m, sn.diag.max_abs());
        for (const auto& d : sn.lower) m = std::max(m, d.max_abs());
        for (const auto& d : sn.upper) m = std::max(m, d.max_abs());
    }
    return m;
}

ResultDiff compare_results(const SelInvResult& a, const SelInvResult& reference)
{
    if (a.layout().partition() != reference.layout().partition() ||
        a.layout().partition().n() != reference.layout().partition().n())
        throw InputError("selected-inverse results have different supernode layouts");

    ResultDiff d;
    // layouts match, so for_each visits both in the same order
    std::vector<std::tuple<Index, Index, double>> ref;
    reference.for_each([&](Index i, Index j, double v) { ref.emplace_back(i, j, v); });
    std::size_t k = 0;
    bool mismatch = false;
    a.for_each([&](Index i, Index j, double v) {
        if (k >= ref.size() || std::get<0>(ref[k]) != i || std::get<1>(ref[k]) != j) {
            mismatch = true;
            return;
        }
        const double diff = std::abs(v - std::get<2>(ref[k]));
        if (diff > d.max_abs_diff || d.row < 0) {
            d.max_abs_diff = diff;
            d.row = i;
            d.col = j;
        }
        ++k;
    });
    if (mismatch || k != ref.size())
        throw InputError("selected-inverse results have different block structure");
    const double scale = reference.max_abs();
    d.relative = scale > 0.0 ? d.max_abs_diff / scale : d.max_abs_diff;
    return d;
}

Dense gather_from_block(const BlockLayout& layout, Index Ia, std::span<const Index> rows_a,
                        Index Ib, std::span<const Index> rows_b, const Dense& block)
{
    const auto& part = layout.partition();
    if (Ia == Ib)
        return block.gather(offsets_from(rows_a, part.start(Ia)), offsets_from(rows_b, part.start(Ia)));
    if (Ia > Ib) {
        const auto& panel = layout.panel(Ib);
        const long b = panel.find(Ia);
        if (b < 0) throw InvariantError(fmt::format("block Ainv({}, {}) outside the fill", Ia, Ib));
        return block.gather(positions_in(panel.block_rows(b), rows_a),
                            offsets_from(rows_b, part.start(Ib)));
    }
    const auto& panel = layout.panel(Ia);
    const long b = panel.find(Ib);
    if (b < 0) throw InvariantError(fmt::format("block Ainv({}, {}) outside the fill", Ia, Ib));
    return block.gather(offsets_from(rows_a, part.start(Ia)), positions_in(panel.block_rows(b), rows_b));
}

Dense inverse_of_diag_lu(const Dense& L_diag, const Dense& U_diag)
{
    Dense X = Dense::identity(L_diag.rows());
    solve_left_unit_lower(L_diag, X);
    solve_left_upper(U_diag, X);
    return X;
}

SelInvResult selected_inversion(const SupFactorization& f, Symmetry symmetry)
{
    const bool symmetric = symmetry == Symmetry::Symmetric;
    if (!f.normalized()) throw InvariantError("selected inversion needs normalized factors");

    const BlockLayout& layout = f.layout();
    SelInvResult result(layout);

    auto stored_block = [&](Index I, Index J) -> const Dense& {
        if (I == J) return result.snode(I).diag;
        if (I > J) {
            const long b = layout.panel(J).find(I);
            if (b < 0) throw InvariantError(fmt::format("block Ainv({}, {}) outside the fill", I, J));
            return result.snode(J).lower[b];
        }
        const long b = layout.panel(I).find(J);
        if (b < 0) throw InvariantError(fmt::format("block Ainv({}, {}) outside the fill", I, J));
        return result.snode(I).upper[b];
    };
    auto ainv_sub = [&](Index I, std::span<const Index> ri, Index J, std::span<const Index> rj) {
        return gather_from_block(layout, I, ri, J, rj, stored_block(I, J));
    };

    for (Index K = f.count() - 1; K >= 0; --K) {
        const SupernodeFactor& fk = f.snode(K);
        const auto& panel = layout.panel(K);
        SupernodeBlocks& out = result.snode(K);
        const std::size_t nb = panel.blocks.size();
        const std::size_t w = fk.L_diag.rows();

        // Ainv(C,K) = -Ainv(C,C) Lhat(C,K)
        for (std::size_t a = 0; a < nb; ++a) {
            auto ra = panel.block_rows(a);
            Dense acc(ra.size(), w);
            for (std::size_t b = 0; b < nb; ++b) {
                Dense sub = ainv_sub(panel.blocks[a].snode, ra, panel.blocks[b].snode, panel.block_rows(b));
                gemm(1.0, sub, Op::None, fk.lower[b], Op::None, acc);
            }
            out.lower[a] = Dense(ra.size(), w);
            axpy(-1.0, acc, out.lower[a]);
        }

        // Ainv(K,K) = U(K,K)^{-1} L(K,K)^{-1} - Uhat(K,C) Ainv(C,K)
        Dense correction(w, w);
        for (std::size_t b = 0; b < nb; ++b) {
            if (symmetric)
                gemm(1.0, fk.lower[b], Op::Trans, out.lower[b], Op::None, correction);
            else
                gemm(1.0, fk.upper[b], Op::None, out.lower[b], Op::None, correction);
        }
        out.diag = inverse_of_diag_lu(fk.L_diag, fk.U_diag);
        axpy(-1.0, correction, out.diag);

        if (symmetric) {
            for (std::size_t b = 0; b < nb; ++b) out.upper[b] = out.lower[b].transposed();
            continue;
        }

        // Ainv(K,C) = -Uhat(K,C) Ainv(C,C)
        for (std::size_t b = 0; b < nb; ++b) {
            auto rb = panel.block_rows(b);
            Dense acc(w, rb.size());
            for (std::size_t a = 0; a < nb; ++a) {
                Dense sub = ainv_sub(panel.blocks[a].snode, panel.block_rows(a), panel.blocks[b].snode, rb);
                gemm(1.0, fk.upper[a], Op::None, sub, Op::None, acc);
            }
            out.upper[b] = Dense(w, rb.size());
            axpy(-1.0, acc, out.upper[b]);
        }
    }
    return result;
}

Dense dense_inverse_oracle(const SparseMatrix& A)
{
    const Index n = A.n();
    if (n > kOracleMaxDimension)
        throw InputError(fmt::format("dense oracle limited to n <= {} (got {})", kOracleMaxDimension, n));

    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
    for (Index j = 0; j < n; ++j) {
        auto rows = A.column_rows(j);
        auto vals = A.column_values(j);
        for (std::size_t p = 0; p < rows.size(); ++p) M(rows[p], j) = vals[p];
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
    const Eigen::MatrixXd& packed = lu.matrixLU();
    double scale = M.cwiseAbs().maxCoeff();
    for (Index k = 0; k < n; ++k) {
        if (!(std::abs(packed(k, k)) > 1e-14 * scale))
            throw InputError("matrix is singular to working precision");
    }
    Eigen::MatrixXd inv = lu.inverse();

    Dense out(static_cast<std::size_t>(n), static_cast<std::size_t>(n));
    for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < n; ++i) out(i, j) = inv(i, j);
    return out;
}

SelInvResult extract_selected(const Dense& dense, const FillPattern& fill, const SupernodePartition& part)
{
    const auto n = static_cast<std::size_t>(part.n());
    if (dense.rows() != n || dense.cols() != n || fill.n() != part.n())
        throw InputError("dense matrix shape does not match the fill pattern");

    SelInvResult result{BlockLayout(fill, part)};
    const auto& layout = result.layout();
    for (Index K = 0; K < part.count(); ++K) {
        auto& sn = result.snode(K);
        const Index s = part.start(K);
        for (std::size_t c = 0; c < sn.diag.cols(); ++c)
            for (std::size_t r = 0; r < sn.diag.rows(); ++r) sn.diag(r, c) = dense(s + r, s + c);
        const auto& panel = layout.panel(K);
        for (std::size_t b = 0; b < panel.blocks.size(); ++b) {
            auto rows = panel.block_rows(b);
            for (std::size_t c = 0; c < sn.lower[b].cols(); ++c)
                for (std::size_t r = 0; r < rows.size(); ++r) {
                    sn.lower[b](r, c) = dense(rows[r], s + c);
                    sn.upper[b](c, r) = dense(s + c, rows[r]);
                }
        }
    }
    return result;
}

}  // namespace pselinv
