#include <gtest/gtest.h>

#include "oracles.hpp"
#include "pselinv/errors.hpp"
#include "pselinv/symbolic.hpp"

using namespace pselinv;

namespace {

std::vector<std::vector<Index>> columns_of(const FillPattern& f)
{
    std::vector<std::vector<Index>> out;
    for (Index j = 0; j < f.n(); ++j) out.emplace_back(f.column(j).begin(), f.column(j).end());
    return out;
}

SparseMatrix cycle_graph(Index n)
{
    std::vector<Index> r, c;
    std::vector<double> v;
    for (Index k = 0; k < n; ++k) {
        const Index next = (k + 1) % n;
        r.insert(r.end(), {k, next, k});
        c.insert(c.end(), {k, k, next});
        v.insert(v.end(), {4.0, -1.0, -1.0});
    }
    return SparseMatrix::from_triplets(n, r, c, v);
}

SparseMatrix dense_pattern(Index n)
{
    std::vector<Index> r, c;
    std::vector<double> v;
    for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < n; ++i) r.push_back(i), c.push_back(j), v.push_back(i == j ? n : 1.0);
    return SparseMatrix::from_triplets(n, r, c, v);
}

SparseMatrix diagonal(Index n)
{
    std::vector<Index> idx;
    for (Index k = 0; k < n; ++k) idx.push_back(k);
    std::vector<double> v(idx.size(), 2.0);
    return SparseMatrix::from_triplets(n, idx, idx, v);
}

// Rows below the supernode containing column j, i.e. struct(j) minus the
// supernode's own columns.
std::vector<Index> below_snode(const FillPattern& f, const SupernodePartition& p, Index j)
{
    std::vector<Index> out;
    for (Index r : f.column(j))
        if (r >= p.end(p.snode_of(j))) out.push_back(r);
    return out;
}

}  // namespace

TEST(EliminationTree, TridiagonalIsAChain)
{
    const auto t = elimination_tree(gen_tridiagonal(4));
    EXPECT_EQ(t.parent, (std::vector<Index>{1, 2, 3, kNoParent}));
}

TEST(EliminationTree, ArrowPointsToLastColumn)
{
    const auto t = elimination_tree(gen_arrow(5));
    EXPECT_EQ(t.parent, (std::vector<Index>{4, 4, 4, 4, kNoParent}));
}

TEST(EliminationTree, MatchesDenseSymbolicElimination)
{
    for (const auto& A : {gen_laplacian_2d(3, 3), gen_laplacian_2d(5, 4), cycle_graph(7),
                          gen_random_diag_dominant(40, 0.08, 3, true)}) {
        const auto t = elimination_tree(A);
        EXPECT_EQ(t.parent, oracle::etree_from_fill(oracle::boolean_fill(A)));
        for (Index j = 0; j < t.size(); ++j)
            if (t.parent[j] != kNoParent) EXPECT_GT(t.parent[j], j);
        // postorder visits children before parents and covers every column once
        std::vector<Index> pos(t.size(), -1);
        for (Index k = 0; k < t.size(); ++k) pos[t.postorder[k]] = k;
        for (Index j = 0; j < t.size(); ++j) {
            ASSERT_GE(pos[j], 0);
            if (t.parent[j] != kNoParent) EXPECT_LT(pos[j], pos[t.parent[j]]);
        }
    }
}

TEST(EliminationTree, RejectsUnsymmetricPattern)
{
    const Index r[] = {0, 1, 1};
    const Index c[] = {0, 0, 1};
    const double v[] = {1.0, 1.0, 1.0};
    EXPECT_THROW(elimination_tree(SparseMatrix::from_triplets(2, r, c, v)), InputError);
}

TEST(SymbolicFill, TridiagonalHasNoFill)
{
    const auto A = gen_tridiagonal(6);
    const auto f = symbolic_fill(A, elimination_tree(A));
    EXPECT_EQ(f.lower_nnz(), 5);
    for (Index j = 0; j + 1 < 6; ++j) EXPECT_EQ(columns_of(f)[j], (std::vector<Index>{j + 1}));
}

TEST(SymbolicFill, MatchesBooleanEliminationOracle)
{
    for (const auto& A : {cycle_graph(5), gen_laplacian_2d(4, 4), gen_laplacian_2d(6, 3), gen_arrow(9),
                          gen_random_diag_dominant(60, 0.05, 8, false)}) {
        const auto f = symbolic_fill(A, elimination_tree(A));
        const auto expect = oracle::boolean_fill(A);
        EXPECT_EQ(columns_of(f), expect);
        Index count = 0;
        for (const auto& c : expect) count += static_cast<Index>(c.size());
        EXPECT_EQ(f.lower_nnz(), count);
    }
}

TEST(SymbolicFill, ContainsPatternAndRespectsParentContainment)
{
    const auto A = gen_random_diag_dominant(80, 0.04, 21, true);
    const auto t = elimination_tree(A);
    const auto f = symbolic_fill(A, t);
    for (Index j = 0; j < A.n(); ++j) {
        for (Index i : A.column_rows(j))
            if (i > j) EXPECT_TRUE(f.contains(i, j));
        if (t.parent[j] == kNoParent) continue;
        const Index p = t.parent[j];
        for (Index i : f.column(j))
            if (i != p) EXPECT_TRUE(f.contains(i, p)) << "row " << i << " col " << j;
    }
}

TEST(Supernodes, DenseMatrixSplitsAtTheCap)
{
    const auto A = dense_pattern(6);
    const auto f = symbolic_fill(A, elimination_tree(A));
    const auto p = detect_supernodes(f, 3);
    EXPECT_EQ(p.count(), 2);
    EXPECT_EQ(p.start(1), 3);
    EXPECT_EQ(p.end(1), 6);
}

TEST(Supernodes, DiagonalMatrixMergesUpToTheCap)
{
    const auto A = diagonal(10);
    const auto f = symbolic_fill(A, elimination_tree(A));
    EXPECT_EQ(detect_supernodes(f, 4).count(), 3);
    EXPECT_EQ(detect_supernodes(f, 1).count(), 10);
    EXPECT_EQ(detect_supernodes(f, 48).count(), 1);
    EXPECT_THROW(detect_supernodes(f, 0), InputError);
}

TEST(Supernodes, PredicateHoldsInsideAndFailsAcrossBoundaries)
{
    for (Index cap : {1, 3, 8, 48}) {
        for (const auto& A : {gen_laplacian_2d(4, 4), gen_laplacian_2d(7, 5), gen_arrow(12),
                              gen_random_diag_dominant(70, 0.05, 2, true)}) {
            const auto f = symbolic_fill(A, elimination_tree(A));
            const auto p = detect_supernodes(f, cap);
            EXPECT_EQ(p.start(0), 0);
            EXPECT_EQ(p.end(p.count() - 1), A.n());
            for (Index K = 0; K < p.count(); ++K) {
                EXPECT_LE(p.width(K), cap);
                for (Index j = p.start(K); j < p.end(K); ++j) {
                    EXPECT_EQ(p.snode_of(j), K);
                    EXPECT_EQ(below_snode(f, p, j), below_snode(f, p, p.start(K)));
                }
                // a boundary is either forced by the cap or by a structure change
                if (K + 1 < p.count() && p.width(K) < cap) {
                    const Index j = p.start(K + 1);
                    std::vector<Index> tail;
                    for (Index r : f.column(j - 1))
                        if (r > j) tail.push_back(r);
                    const auto next = columns_of(f)[j];
                    EXPECT_NE(tail, next) << "cap " << cap << " boundary " << j;
                }
            }
        }
    }
}

TEST(Supernodes, TridiagonalSingletonsWithCapOne)
{
    const auto A = gen_tridiagonal(8);
    const auto s = analyze(A, 1);
    EXPECT_EQ(s.layout.count(), 8);
    // only the last two columns share (empty) trailing structure
    EXPECT_EQ(analyze(A, 48).layout.count(), 7);
}

TEST(AncestorBlocks, BandAndLastSupernode)
{
    const auto A = gen_tridiagonal(6);
    const auto s = analyze(A, 1);
    const auto& p = s.layout.partition();
    for (Index K = 0; K + 1 < p.count(); ++K)
        EXPECT_EQ(ancestor_blocks(K, s.fill, p), (std::vector<Index>{K + 1}));
    EXPECT_TRUE(ancestor_blocks(p.count() - 1, s.fill, p).empty());
    EXPECT_THROW(ancestor_blocks(p.count(), s.fill, p), InputError);
}

TEST(AncestorBlocks, MatchFillOracle)
{
    const auto A = gen_laplacian_2d(4, 4);
    for (Index cap : {1, 4}) {
        const auto s = analyze(A, cap);
        const auto& p = s.layout.partition();
        const auto fill = oracle::boolean_fill(A);
        for (Index K = 0; K < p.count(); ++K) {
            std::set<Index> expect;
            for (Index j = p.start(K); j < p.end(K); ++j)
                for (Index i : fill[j])
                    if (p.snode_of(i) > K) expect.insert(p.snode_of(i));
            const auto got = ancestor_blocks(K, s.fill, p);
            EXPECT_EQ(std::vector<Index>(expect.begin(), expect.end()), got);
            const auto& panel = s.layout.panel(K);
            ASSERT_EQ(panel.blocks.size(), got.size());
            for (std::size_t b = 0; b < got.size(); ++b) {
                EXPECT_EQ(panel.blocks[b].snode, got[b]);
                EXPECT_EQ(panel.find(got[b]), static_cast<long>(b));
                for (Index r : panel.block_rows(b)) EXPECT_EQ(p.snode_of(r), got[b]);
            }
            EXPECT_EQ(s.layout.parent(K), got.empty() ? kNoParent : got.front());
        }
    }
}
