#include <gtest/gtest.h>

#include "oracles.hpp"
#include "pselinv/errors.hpp"
#include "pselinv/factor.hpp"

using namespace pselinv;

namespace {

struct DenseFactors {
    oracle::Matrix L, U;
};

// Scatter the supernodal panels into full n x n triangles.
DenseFactors expand(const SupFactorization& f)
{
    const auto& layout = f.layout();
    const auto& part = layout.partition();
    const auto n = static_cast<std::size_t>(part.n());
    DenseFactors d{oracle::Matrix(n, std::vector<double>(n, 0.0)), oracle::Matrix(n, std::vector<double>(n, 0.0))};
    for (Index K = 0; K < f.count(); ++K) {
        const auto& sn = f.snode(K);
        const auto s = static_cast<std::size_t>(part.start(K));
        const auto w = static_cast<std::size_t>(part.width(K));
        for (std::size_t i = 0; i < w; ++i)
            for (std::size_t j = 0; j < w; ++j) {
                d.L[s + i][s + j] = sn.L_diag(i, j);
                d.U[s + i][s + j] = sn.U_diag(i, j);
            }
        const auto& panel = layout.panel(K);
        for (std::size_t b = 0; b < panel.blocks.size(); ++b) {
            auto rows = panel.block_rows(b);
            for (std::size_t r = 0; r < rows.size(); ++r)
                for (std::size_t j = 0; j < w; ++j) {
                    d.L[rows[r]][s + j] = sn.lower[b](r, j);
                    d.U[s + j][rows[r]] = sn.upper[b](j, r);
                }
        }
    }
    return d;
}

SupFactorization factor(const SparseMatrix& A, Index cap)
{
    const auto s = analyze(A, cap);
    return supernodal_lu(A, s.layout.partition(), s.fill);
}

double reconstruction_error(const SparseMatrix& A, const SupFactorization& f)
{
    const auto d = expand(f);
    const auto LU = oracle::multiply(d.L, d.U);
    const auto M = oracle::to_rows(A);
    double e = 0.0;
    for (std::size_t i = 0; i < M.size(); ++i)
        for (std::size_t j = 0; j < M.size(); ++j) e = std::max(e, std::abs(LU[i][j] - M[i][j]));
    return e / A.max_abs();
}

}  // namespace

TEST(SupernodalLu, IdentityFactorsToIdentity)
{
    const Index idx[] = {0, 1, 2, 3};
    const double one[] = {1.0, 1.0, 1.0, 1.0};
    const auto A = SparseMatrix::from_triplets(4, idx, idx, one);
    const auto d = expand(factor(A, 2));
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) {
            EXPECT_EQ(d.L[i][j], i == j ? 1.0 : 0.0);
            EXPECT_EQ(d.U[i][j], i == j ? 1.0 : 0.0);
        }
}

TEST(SupernodalLu, TwoByTwoByHand)
{
    const auto A = gen_tridiagonal(2);
    for (Index cap : {1, 2}) {
        const auto d = expand(factor(A, cap));
        EXPECT_DOUBLE_EQ(d.L[1][0], -0.25);
        EXPECT_DOUBLE_EQ(d.L[0][0], 1.0);
        EXPECT_DOUBLE_EQ(d.U[0][0], 4.0);
        EXPECT_DOUBLE_EQ(d.U[0][1], -1.0);
        EXPECT_DOUBLE_EQ(d.U[1][1], 3.75);
    }
}

TEST(SupernodalLu, ReconstructsMatrixAgainstDenseMultiply)
{
    for (Index cap : {1, 4, 48}) {
        for (const auto& A : {gen_laplacian_2d(4, 4), gen_laplacian_2d(9, 7), gen_arrow(20),
                              gen_random_diag_dominant(120, 0.03, 5, false),
                              gen_random_diag_dominant(90, 0.05, 6, true)}) {
            EXPECT_LE(reconstruction_error(A, factor(A, cap)), 1e-12) << "cap " << cap << " n " << A.n();
        }
    }
}

TEST(SupernodalLu, MatchesDenseUnpivotedLu)
{
    const auto A = gen_random_diag_dominant(40, 0.1, 12, false);
    const auto d = expand(factor(A, 8));
    const auto [L, U] = oracle::lu(oracle::to_rows(A));
    for (std::size_t i = 0; i < 40; ++i)
        for (std::size_t j = 0; j < 40; ++j) {
            EXPECT_NEAR(d.L[i][j], L[i][j], 1e-13);
            EXPECT_NEAR(d.U[i][j], U[i][j], 1e-12);
        }
}

TEST(SupernodalLu, RepeatedRunsAreBitIdentical)
{
    const auto A = gen_laplacian_2d(8, 8);
    const auto f1 = factor(A, 6);
    const auto f2 = factor(A, 6);
    for (Index K = 0; K < f1.count(); ++K) {
        EXPECT_EQ(f1.snode(K).L_diag, f2.snode(K).L_diag);
        EXPECT_EQ(f1.snode(K).U_diag, f2.snode(K).U_diag);
        EXPECT_EQ(f1.snode(K).lower, f2.snode(K).lower);
        EXPECT_EQ(f1.snode(K).upper, f2.snode(K).upper);
    }
}

TEST(SupernodalLu, ZeroPivotNamesTheColumn)
{
    // [[1,1],[1,1]] leaves an exact zero in the second pivot
    const Index r[] = {0, 1, 0, 1};
    const Index c[] = {0, 0, 1, 1};
    const double v[] = {1.0, 1.0, 1.0, 1.0};
    const auto A = SparseMatrix::from_triplets(2, r, c, v);
    for (Index cap : {1, 2}) {
        try {
            factor(A, cap);
            FAIL() << "expected a factorization failure";
        } catch (const FactorizationError& e) {
            EXPECT_EQ(e.column(), 1);
        }
    }
}

TEST(SupernodalLu, SymmetricPatternOfUIsTransposeOfL)
{
    const auto A = gen_random_diag_dominant(50, 0.06, 4, true);
    const auto d = expand(factor(A, 5));
    for (std::size_t i = 0; i < 50; ++i)
        for (std::size_t j = i + 1; j < 50; ++j) EXPECT_EQ(d.U[i][j] != 0.0, d.L[j][i] != 0.0);
}

TEST(Normalize, PanelsMultiplyBackToOriginal)
{
    const auto A = gen_random_diag_dominant(60, 0.08, 3, false);
    const auto raw = factor(A, 2);
    const auto norm = normalize_factors(raw);
    ASSERT_TRUE(norm.normalized());
    ASSERT_FALSE(raw.normalized());
    for (Index K = 0; K < raw.count(); ++K) {
        const auto& r = raw.snode(K);
        const auto& n = norm.snode(K);
        for (std::size_t b = 0; b < r.lower.size(); ++b) {
            Dense back(r.lower[b].rows(), r.lower[b].cols());
            gemm(1.0, n.lower[b], Op::None, r.L_diag, Op::None, back);
            axpy(-1.0, r.lower[b], back);
            EXPECT_LE(back.max_abs(), 1e-13);
            Dense back_u(r.upper[b].rows(), r.upper[b].cols());
            gemm(1.0, r.U_diag, Op::None, n.upper[b], Op::None, back_u);
            axpy(-1.0, r.upper[b], back_u);
            EXPECT_LE(back_u.max_abs(), 1e-13);
        }
    }
}

TEST(Normalize, ScalarSupernodesLeaveLUnchanged)
{
    const auto A = gen_tridiagonal(5);
    auto f = factor(A, 1);
    const auto before = f.snode(0).lower[0];
    normalize_in_place(f);
    EXPECT_EQ(f.snode(0).lower[0], before);
}

TEST(Normalize, DiagonalMatrixOnlySetsTheFlag)
{
    const Index idx[] = {0, 1, 2};
    const double v[] = {2.0, 3.0, 4.0};
    auto f = factor(SparseMatrix::from_triplets(3, idx, idx, v), 1);
    normalize_in_place(f);
    EXPECT_TRUE(f.normalized());
    for (Index K = 0; K < 3; ++K) EXPECT_TRUE(f.snode(K).lower.empty());
}

TEST(Normalize, TwiceIsAnError)
{
    auto f = factor(gen_laplacian_2d(3, 3), 4);
    normalize_in_place(f);
    EXPECT_THROW(normalize_in_place(f), InvariantError);
    EXPECT_THROW(normalize_factors(std::move(f)), InvariantError);
}
