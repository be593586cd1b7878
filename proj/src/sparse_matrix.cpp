#include "pselinv/sparse_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <numeric>
#include <random>

#include "pselinv/errors.hpp"

namespace pselinv {

SparseMatrix SparseMatrix::from_triplets(Index n, std::span<const Index> rows,
                                         std::span<const Index> cols,
                                         std::span<const double> vals)
{
    if (n < 0) throw InputError("negative matrix dimension");
    if (rows.size() != cols.size() || rows.size() != vals.size())
        throw InputError("triplet arrays differ in length");

    std::vector<std::size_t> order(rows.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t k = 0; k < rows.size(); ++k) {
        if (rows[k] < 0 || rows[k] >= n || cols[k] < 0 || cols[k] >= n)
            throw InputError(fmt::format("entry ({}, {}) outside a {}x{} matrix",
                                         rows[k], cols[k], n, n));
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return cols[a] != cols[b] ? cols[a] < cols[b] : rows[a] < rows[b];
    });

    SparseMatrix A;
    A.n_ = n;
    A.col_ptr_.assign(static_cast<std::size_t>(n) + 1, 0);
    for (std::size_t k : order) {
        const bool dup = !A.row_idx_.empty() && A.row_idx_.back() == rows[k] &&
                         A.col_ptr_[cols[k] + 1] > 0;
        if (dup) {
            A.values_.back() += vals[k];
            continue;
        }
        A.row_idx_.push_back(rows[k]);
        A.values_.push_back(vals[k]);
        ++A.col_ptr_[cols[k] + 1];
    }
    std::partial_sum(A.col_ptr_.begin(), A.col_ptr_.end(), A.col_ptr_.begin());
    return A;
}

SparseMatrix SparseMatrix::from_csc(Index n, std::vector<Index> col_ptr,
                                    std::vector<Index> row_idx, std::vector<double> values)
{
    if (n < 0 || col_ptr.size() != static_cast<std::size_t>(n) + 1 || col_ptr.front() != 0 ||
        col_ptr.back() != static_cast<Index>(row_idx.size()) || row_idx.size() != values.size())
        throw InputError("inconsistent CSC arrays");
    for (Index j = 0; j < n; ++j) {
        if (col_ptr[j] > col_ptr[j + 1]) throw InputError("col_ptr not monotone");
        for (Index p = col_ptr[j]; p < col_ptr[j + 1]; ++p) {
            if (row_idx[p] < 0 || row_idx[p] >= n) throw InputError("row index out of range");
            if (p > col_ptr[j] && row_idx[p] <= row_idx[p - 1])
                throw InputError("row indices not strictly increasing");
        }
    }
    SparseMatrix A;
    A.n_ = n;
    A.col_ptr_ = std::move(col_ptr);
    A.row_idx_ = std::move(row_idx);
    A.values_ = std::move(values);
    return A;
}

std::span<const Index> SparseMatrix::column_rows(Index j) const
{
    return std::span<const Index>(row_idx_).subspan(col_ptr_[j], col_ptr_[j + 1] - col_ptr_[j]);
}

std::span<const double> SparseMatrix::column_values(Index j) const
{
    return std::span<const double>(values_).subspan(col_ptr_[j], col_ptr_[j + 1] - col_ptr_[j]);
}

double SparseMatrix::at(Index i, Index j) const
{
    auto rows = column_rows(j);
    auto it = std::lower_bound(rows.begin(), rows.end(), i);
    if (it == rows.end() || *it != i) return 0.0;
    return values_[col_ptr_[j] + (it - rows.begin())];
}

bool SparseMatrix::has_entry(Index i, Index j) const
{
    auto rows = column_rows(j);
    return std::binary_search(rows.begin(), rows.end(), i);
}

double SparseMatrix::max_abs() const noexcept
{
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

bool SparseMatrix::is_pattern_symmetric() const
{
    for (Index j = 0; j < n_; ++j)
        for (Index i : column_rows(j))
            if (!has_entry(j, i)) return false;
    return true;
}

bool SparseMatrix::is_numerically_symmetric() const
{
    for (Index j = 0; j < n_; ++j) {
        auto rows = column_rows(j);
        auto vals = column_values(j);
        for (std::size_t p = 0; p < rows.size(); ++p) {
            if (!has_entry(j, rows[p]) || at(j, rows[p]) != vals[p]) return false;
        }
    }
    return true;
}

Dense SparseMatrix::to_dense() const
{
    Dense D(static_cast<std::size_t>(n_), static_cast<std::size_t>(n_));
    for (Index j = 0; j < n_; ++j) {
        auto rows = column_rows(j);
        auto vals = column_values(j);
        for (std::size_t p = 0; p < rows.size(); ++p) D(rows[p], j) = vals[p];
    }
    return D;
}

SparseMatrix SparseMatrix::permuted(std::span<const Index> perm) const
{
    if (static_cast<Index>(perm.size()) != n_) throw InputError("permutation length mismatch");
    std::vector<Index> inverse(n_, -1);
    for (Index k = 0; k < n_; ++k) {
        if (perm[k] < 0 || perm[k] >= n_ || inverse[perm[k]] != -1)
            throw InputError("not a permutation");
        inverse[perm[k]] = k;
    }
    std::vector<Index> r, c;
    std::vector<double> v;
    for (Index j = 0; j < n_; ++j) {
        auto rows = column_rows(j);
        auto vals = column_values(j);
        for (std::size_t p = 0; p < rows.size(); ++p) {
            r.push_back(inverse[rows[p]]);
            c.push_back(inverse[j]);
            v.push_back(vals[p]);
        }
    }
    return from_triplets(n_, r, c, v);
}

SparseMatrix symmetrize_pattern(const SparseMatrix& A)
{
    std::vector<Index> r, c;
    std::vector<double> v;
    for (Index j = 0; j < A.n(); ++j) {
        auto rows = A.column_rows(j);
        auto vals = A.column_values(j);
        for (std::size_t p = 0; p < rows.size(); ++p) {
            r.push_back(rows[p]);
            c.push_back(j);
            v.push_back(vals[p]);
            if (!A.has_entry(j, rows[p])) {
                r.push_back(j);
                c.push_back(rows[p]);
                v.push_back(0.0);
            }
        }
    }
    return SparseMatrix::from_triplets(A.n(), r, c, v);
}

SparseMatrix gen_laplacian_2d(Index nx, Index ny)
{
    if (nx < 1 || ny < 1) throw InputError("laplacian grid dimensions must be positive");
    const Index n = nx * ny;
    std::vector<Index> r, c;
    std::vector<double> v;
    auto add = [&](Index i, Index j, double x) {
        r.push_back(i);
        c.push_back(j);
        v.push_back(x);
    };
    for (Index y = 0; y < ny; ++y) {
        for (Index x = 0; x < nx; ++x) {
            const Index k = y * nx + x;
            add(k, k, 4.0);
            if (x > 0) add(k, k - 1, -1.0);
            if (x + 1 < nx) add(k, k + 1, -1.0);
            if (y > 0) add(k, k - nx, -1.0);
            if (y + 1 < ny) add(k, k + nx, -1.0);
        }
    }
    return SparseMatrix::from_triplets(n, r, c, v);
}

SparseMatrix gen_tridiagonal(Index n, double diag, double off)
{
    if (n < 1) throw InputError("dimension must be positive");
    std::vector<Index> r, c;
    std::vector<double> v;
    for (Index k = 0; k < n; ++k) {
        r.push_back(k), c.push_back(k), v.push_back(diag);
        if (k + 1 < n) {
            r.push_back(k + 1), c.push_back(k), v.push_back(off);
            r.push_back(k), c.push_back(k + 1), v.push_back(off);
        }
    }
    return SparseMatrix::from_triplets(n, r, c, v);
}

SparseMatrix gen_arrow(Index n)
{
    if (n < 1) throw InputError("dimension must be positive");
    std::vector<Index> r, c;
    std::vector<double> v;
    const Index last = n - 1;
    for (Index k = 0; k < last; ++k) {
        r.push_back(k), c.push_back(k), v.push_back(4.0);
        r.push_back(last), c.push_back(k), v.push_back(-1.0);
        r.push_back(k), c.push_back(last), v.push_back(-1.0);
    }
    r.push_back(last), c.push_back(last), v.push_back(static_cast<double>(n) + 3.0);
    return SparseMatrix::from_triplets(n, r, c, v);
}

SparseMatrix gen_random_diag_dominant(Index n, double density, std::uint64_t seed, bool symmetric)
{
    if (n < 1) throw InputError("dimension must be positive");
    std::mt19937_64 gen(seed);
    auto uniform = [&gen] { return static_cast<double>(gen() >> 11) * 0x1.0p-53; };

    std::vector<Index> r, c;
    std::vector<double> v;
    std::vector<double> row_abs(n, 0.0);
    for (Index j = 0; j < n; ++j) {
        for (Index i = j + 1; i < n; ++i) {
            if (uniform() >= density) continue;
            const double lower = 2.0 * uniform() - 1.0;
            const double upper = symmetric ? lower : 2.0 * uniform() - 1.0;
            r.push_back(i), c.push_back(j), v.push_back(lower);
            r.push_back(j), c.push_back(i), v.push_back(upper);
            row_abs[i] += std::abs(lower);
            row_abs[j] += std::abs(upper);
        }
    }
    for (Index k = 0; k < n; ++k) {
        r.push_back(k), c.push_back(k), v.push_back(row_abs[k] + 1.0 + uniform());
    }
    return SparseMatrix::from_triplets(n, r, c, v);
}

}  // namespace pselinv
