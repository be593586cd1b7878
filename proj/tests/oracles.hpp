#pragma once

// Reference computations for the tests. Everything here works on plain
// row-major std::vector data so it shares no code with the library kernels.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <stdexcept>
#include <vector>

#include "pselinv/sparse_matrix.hpp"

namespace oracle {

using pselinv::Index;
using Matrix = std::vector<std::vector<double>>;

inline Matrix to_rows(const pselinv::SparseMatrix& A)
{
    Matrix M(A.n(), std::vector<double>(A.n(), 0.0));
    for (Index j = 0; j < A.n(); ++j) {
        auto rows = A.column_rows(j);
        auto vals = A.column_values(j);
        for (std::size_t p = 0; p < rows.size(); ++p) M[rows[p]][j] = vals[p];
    }
    return M;
}

inline Matrix multiply(const Matrix& A, const Matrix& B)
{
    const std::size_t n = A.size(), k = B.size(), m = B.empty() ? 0 : B[0].size();
    Matrix C(n, std::vector<double>(m, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t l = 0; l < k; ++l)
            for (std::size_t j = 0; j < m; ++j) C[i][j] += A[i][l] * B[l][j];
    return C;
}

/// Gauss-Jordan inverse with partial pivoting.
inline Matrix inverse(Matrix A)
{
    const std::size_t n = A.size();
    Matrix X(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) X[i][i] = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(A[i][k]) > std::abs(A[piv][k])) piv = i;
        if (A[piv][k] == 0.0) throw std::runtime_error("singular");
        std::swap(A[k], A[piv]);
        std::swap(X[k], X[piv]);
        const double d = A[k][k];
        for (std::size_t j = 0; j < n; ++j) {
            A[k][j] /= d;
            X[k][j] /= d;
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (i == k || A[i][k] == 0.0) continue;
            const double f = A[i][k];
            for (std::size_t j = 0; j < n; ++j) {
                A[i][j] -= f * A[k][j];
                X[i][j] -= f * X[k][j];
            }
        }
    }
    return X;
}

/// Boolean Gaussian elimination on the pattern: strictly-lower rows of each
/// column of the filled factor.
inline std::vector<std::vector<Index>> boolean_fill(const pselinv::SparseMatrix& A)
{
    const auto n = static_cast<std::size_t>(A.n());
    std::vector<std::vector<char>> P(n, std::vector<char>(n, 0));
    for (Index j = 0; j < A.n(); ++j)
        for (Index i : A.column_rows(j)) P[i][j] = 1;
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = k + 1; i < n; ++i)
            if (P[i][k])
                for (std::size_t j = k + 1; j < n; ++j)
                    if (P[k][j]) P[i][j] = 1;
    std::vector<std::vector<Index>> below(n);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = j + 1; i < n; ++i)
            if (P[i][j]) below[j].push_back(static_cast<Index>(i));
    return below;
}

/// parent(j) = min { i > j : L(i,j) != 0 }, or -1.
inline std::vector<Index> etree_from_fill(const std::vector<std::vector<Index>>& below)
{
    std::vector<Index> parent(below.size(), -1);
    for (std::size_t j = 0; j < below.size(); ++j)
        if (!below[j].empty()) parent[j] = *std::min_element(below[j].begin(), below[j].end());
    return parent;
}

/// Unpivoted dense LU, L unit lower and U upper returned separately.
inline std::pair<Matrix, Matrix> lu(Matrix A)
{
    const std::size_t n = A.size();
    Matrix L(n, std::vector<double>(n, 0.0)), U(n, std::vector<double>(n, 0.0));
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t j = k; j < n; ++j) U[k][j] = A[k][j];
        L[k][k] = 1.0;
        for (std::size_t i = k + 1; i < n; ++i) L[i][k] = A[i][k] / U[k][k];
        for (std::size_t i = k + 1; i < n; ++i)
            for (std::size_t j = k + 1; j < n; ++j) A[i][j] -= L[i][k] * U[k][j];
    }
    return {L, U};
}

/// Two independent chains of `m` columns each joined by one separator
/// column: the elimination tree has two branches below the last column.
inline pselinv::SparseMatrix two_branch_matrix(Index m)
{
    std::vector<Index> r, c;
    std::vector<double> v;
    auto add = [&](Index i, Index j, double x) {
        r.push_back(i), c.push_back(j), v.push_back(x);
        if (i != j) r.push_back(j), c.push_back(i), v.push_back(x);
    };
    const Index n = 2 * m + 1;
    for (Index k = 0; k < n; ++k) add(k, k, 4.0);
    for (Index b = 0; b < 2; ++b)
        for (Index k = 0; k + 1 < m; ++k) add(b * m + k + 1, b * m + k, -1.0);
    add(n - 1, m - 1, -1.0);
    add(n - 1, 2 * m - 1, -1.0);
    return pselinv::SparseMatrix::from_triplets(n, r, c, v);
}

/// Reorders two_branch_matrix(m) (m even) so that on a 4x4 block-cyclic grid
/// the first chain lands on columns 0,1 mod 4 and the second on 2,3 mod 4.
/// Returns perm[new] = old.
inline std::vector<Index> branch_split_permutation(Index m)
{
    std::vector<Index> perm(static_cast<std::size_t>(2 * m + 1));
    for (Index k = 0; k < m; ++k) {
        perm[4 * (k / 2) + k % 2] = k;
        perm[4 * (k / 2) + 2 + k % 2] = m + k;
    }
    perm[2 * m] = 2 * m;
    return perm;
}

/// Positions in the event log of the first and last message whose
/// supernode satisfies `in_branch`, or {-1, -1}.
template <class Events, class Pred>
std::pair<long, long> event_span(const Events& events, Pred in_branch)
{
    long first = -1, last = -1;
    for (std::size_t k = 0; k < events.size(); ++k) {
        if (!in_branch(events[k].supernode)) continue;
        if (first < 0) first = static_cast<long>(k);
        last = static_cast<long>(k);
    }
    return {first, last};
}

}  // namespace oracle
