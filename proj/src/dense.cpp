#include "pselinv/dense.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace pselinv {

Dense Dense::identity(std::size_t n)
{
    Dense I(n, n);
    for (std::size_t i = 0; i < n; ++i) I(i, i) = 1.0;
    return I;
}

Dense Dense::transposed() const
{
    Dense T(cols_, rows_);
    for (std::size_t j = 0; j < cols_; ++j)
        for (std::size_t i = 0; i < rows_; ++i) T(j, i) = (*this)(i, j);
    return T;
}

double Dense::max_abs() const noexcept
{
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
}

Dense Dense::gather(std::span<const std::size_t> row_offsets,
                    std::span<const std::size_t> col_offsets) const
{
    Dense out(row_offsets.size(), col_offsets.size());
    for (std::size_t j = 0; j < col_offsets.size(); ++j)
        for (std::size_t i = 0; i < row_offsets.size(); ++i)
            out(i, j) = (*this)(row_offsets[i], col_offsets[j]);
    return out;
}

void gemm(double alpha, const Dense& A, Op opa, const Dense& B, Op opb, Dense& C)
{
    const std::size_t m = opa == Op::None ? A.rows() : A.cols();
    const std::size_t k = opa == Op::None ? A.cols() : A.rows();
    const std::size_t kb = opb == Op::None ? B.rows() : B.cols();
    const std::size_t n = opb == Op::None ? B.cols() : B.rows();
    assert(k == kb && C.rows() == m && C.cols() == n);
    (void)kb;

    auto a = [&](std::size_t i, std::size_t l) { return opa == Op::None ? A(i, l) : A(l, i); };
    auto b = [&](std::size_t l, std::size_t j) { return opb == Op::None ? B(l, j) : B(j, l); };

    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t l = 0; l < k; ++l) {
            const double s = alpha * b(l, j);
            if (s == 0.0) continue;
            for (std::size_t i = 0; i < m; ++i) C(i, j) += a(i, l) * s;
        }
    }
}

long lu_nopivot(Dense& A, double tol)
{
    const std::size_t n = A.rows();
    assert(A.cols() == n);
    for (std::size_t k = 0; k < n; ++k) {
        const double piv = A(k, k);
        if (!(std::abs(piv) > tol)) return static_cast<long>(k);
        for (std::size_t i = k + 1; i < n; ++i) A(i, k) /= piv;
        for (std::size_t j = k + 1; j < n; ++j) {
            const double u = A(k, j);
            if (u == 0.0) continue;
            for (std::size_t i = k + 1; i < n; ++i) A(i, j) -= A(i, k) * u;
        }
    }
    return -1;
}

void split_lu(const Dense& packed, Dense& L, Dense& U)
{
    const std::size_t n = packed.rows();
    L = Dense(n, n);
    U = Dense(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            if (i > j) L(i, j) = packed(i, j);
            else U(i, j) = packed(i, j);
        }
        L(j, j) = 1.0;
    }
}

void solve_right_upper(Dense& X, const Dense& U)
{
    const std::size_t n = U.rows();
    assert(X.cols() == n);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t l = 0; l < j; ++l) {
            const double u = U(l, j);
            if (u == 0.0) continue;
            for (std::size_t i = 0; i < X.rows(); ++i) X(i, j) -= X(i, l) * u;
        }
        const double d = U(j, j);
        for (std::size_t i = 0; i < X.rows(); ++i) X(i, j) /= d;
    }
}

void solve_right_unit_lower(Dense& X, const Dense& L)
{
    const std::size_t n = L.rows();
    assert(X.cols() == n);
    for (std::size_t jj = n; jj-- > 0;) {
        for (std::size_t l = jj + 1; l < n; ++l) {
            const double v = L(l, jj);
            if (v == 0.0) continue;
            for (std::size_t i = 0; i < X.rows(); ++i) X(i, jj) -= X(i, l) * v;
        }
    }
}

void solve_left_unit_lower(const Dense& L, Dense& X)
{
    const std::size_t n = L.rows();
    assert(X.rows() == n);
    for (std::size_t j = 0; j < X.cols(); ++j) {
        for (std::size_t k = 0; k < n; ++k) {
            const double x = X(k, j);
            if (x == 0.0) continue;
            for (std::size_t i = k + 1; i < n; ++i) X(i, j) -= L(i, k) * x;
        }
    }
}

void solve_left_upper(const Dense& U, Dense& X)
{
    const std::size_t n = U.rows();
    assert(X.rows() == n);
    for (std::size_t j = 0; j < X.cols(); ++j) {
        for (std::size_t k = n; k-- > 0;) {
            X(k, j) /= U(k, k);
            const double x = X(k, j);
            if (x == 0.0) continue;
            for (std::size_t i = 0; i < k; ++i) X(i, j) -= U(i, k) * x;
        }
    }
}

void axpy(double alpha, const Dense& Y, Dense& X)
{
    assert(X.rows() == Y.rows() && X.cols() == Y.cols());
    auto x = X.values();
    auto y = Y.values();
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += alpha * y[i];
}

}  // namespace pselinv
