#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "pselinv/dense.hpp"

using namespace pselinv;

namespace {

Dense random_dense(std::size_t r, std::size_t c, std::mt19937_64& gen)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Dense d(r, c);
    for (auto& x : d.values()) x = u(gen);
    return d;
}

oracle::Matrix rows_of(const Dense& d, bool trans = false)
{
    const std::size_t r = trans ? d.cols() : d.rows(), c = trans ? d.rows() : d.cols();
    oracle::Matrix M(r, std::vector<double>(c));
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) M[i][j] = trans ? d(j, i) : d(i, j);
    return M;
}

double max_diff(const Dense& d, const oracle::Matrix& M)
{
    double e = 0.0;
    for (std::size_t i = 0; i < d.rows(); ++i)
        for (std::size_t j = 0; j < d.cols(); ++j) e = std::max(e, std::abs(d(i, j) - M[i][j]));
    return e;
}

// Diagonally dominant so the unpivoted LU is stable.
Dense dominant(std::size_t n, std::mt19937_64& gen)
{
    Dense A = random_dense(n, n, gen);
    for (std::size_t i = 0; i < n; ++i) A(i, i) += static_cast<double>(n) + 1.0;
    return A;
}

}  // namespace

TEST(Dense, GemmMatchesNaiveProductForAllTransposeCombinations)
{
    std::mt19937_64 gen(11);
    for (Op oa : {Op::None, Op::Trans}) {
        for (Op ob : {Op::None, Op::Trans}) {
            Dense A = oa == Op::None ? random_dense(5, 3, gen) : random_dense(3, 5, gen);
            Dense B = ob == Op::None ? random_dense(3, 4, gen) : random_dense(4, 3, gen);
            Dense C = random_dense(5, 4, gen);
            auto expect = oracle::multiply(rows_of(A, oa == Op::Trans), rows_of(B, ob == Op::Trans));
            auto c0 = rows_of(C);
            for (std::size_t i = 0; i < 5; ++i)
                for (std::size_t j = 0; j < 4; ++j) expect[i][j] = c0[i][j] - 2.0 * expect[i][j];
            gemm(-2.0, A, oa, B, ob, C);
            EXPECT_LT(max_diff(C, expect), 1e-14);
        }
    }
}

TEST(Dense, LuReproducesTheMatrix)
{
    std::mt19937_64 gen(5);
    const Dense A = dominant(7, gen);
    Dense packed = A;
    ASSERT_EQ(lu_nopivot(packed, 1e-14), -1);
    Dense L, U;
    split_lu(packed, L, U);
    auto [Lo, Uo] = oracle::lu(rows_of(A));
    EXPECT_LT(max_diff(L, Lo), 1e-13);
    EXPECT_LT(max_diff(U, Uo), 1e-12);
}

TEST(Dense, LuReportsFirstBadPivot)
{
    Dense A(3, 3);
    A(0, 0) = 1.0;
    A(1, 1) = 0.0;
    A(2, 2) = 1.0;
    EXPECT_EQ(lu_nopivot(A, 1e-14), 1);
}

TEST(Dense, TriangularSolvesInvertTheirFactors)
{
    std::mt19937_64 gen(17);
    Dense packed = dominant(6, gen);
    ASSERT_EQ(lu_nopivot(packed, 1e-14), -1);
    Dense L, U;
    split_lu(packed, L, U);
    const Dense X = random_dense(4, 6, gen);
    const Dense Y = random_dense(6, 4, gen);

    Dense a = X;
    solve_right_upper(a, U);  // a = X U^{-1}
    Dense back(4, 6);
    gemm(1.0, a, Op::None, U, Op::None, back);
    EXPECT_LT(max_diff(back, rows_of(X)), 1e-13);

    Dense b = X;
    solve_right_unit_lower(b, L);
    Dense back2(4, 6);
    gemm(1.0, b, Op::None, L, Op::None, back2);
    EXPECT_LT(max_diff(back2, rows_of(X)), 1e-13);

    Dense c = Y;
    solve_left_unit_lower(L, c);
    Dense back3(6, 4);
    gemm(1.0, L, Op::None, c, Op::None, back3);
    EXPECT_LT(max_diff(back3, rows_of(Y)), 1e-13);

    Dense d = Y;
    solve_left_upper(U, d);
    Dense back4(6, 4);
    gemm(1.0, U, Op::None, d, Op::None, back4);
    EXPECT_LT(max_diff(back4, rows_of(Y)), 1e-13);
}

TEST(Dense, GatherAndTranspose)
{
    Dense A(3, 3);
    for (std::size_t j = 0; j < 3; ++j)
        for (std::size_t i = 0; i < 3; ++i) A(i, j) = static_cast<double>(10 * i + j);
    const std::size_t rows[] = {2, 0};
    const std::size_t cols[] = {1};
    Dense g = A.gather(rows, cols);
    ASSERT_EQ(g.rows(), 2u);
    ASSERT_EQ(g.cols(), 1u);
    EXPECT_EQ(g(0, 0), 21.0);
    EXPECT_EQ(g(1, 0), 1.0);
    EXPECT_EQ(A.transposed().transposed(), A);
    EXPECT_EQ(A.transposed()(0, 2), 20.0);
    EXPECT_EQ(A.max_abs(), 22.0);
}
