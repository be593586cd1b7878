#include <set>

#include <gtest/gtest.h>

#include "pselinv/errors.hpp"
#include "pselinv/grid.hpp"

using namespace pselinv;

TEST(ProcessGrid, RowMajorNumbering)
{
    const auto g = build_grid(4, 3);
    EXPECT_EQ(g.size(), 12);
    EXPECT_EQ(g.rank(1, 2), 5);
    EXPECT_EQ(g.row_of(5), 1);
    EXPECT_EQ(g.col_of(5), 2);
    EXPECT_EQ(g.rank(3, 2), 11);
}

TEST(ProcessGrid, CoordinatesAreABijection)
{
    for (auto [pr, pc] : {std::pair{2, 2}, std::pair{4, 3}, std::pair{1, 7}, std::pair{8, 8}}) {
        const auto g = build_grid(pr, pc);
        std::set<Rank> seen;
        for (int r = 0; r < pr; ++r)
            for (int c = 0; c < pc; ++c) {
                const Rank k = g.rank(r, c);
                EXPECT_EQ(g.row_of(k), r);
                EXPECT_EQ(g.col_of(k), c);
                seen.insert(k);
            }
        EXPECT_EQ(static_cast<int>(seen.size()), g.size());
        EXPECT_EQ(*seen.begin(), 0);
        EXPECT_EQ(*seen.rbegin(), g.size() - 1);
    }
}

TEST(ProcessGrid, RejectsEmptyDimensions)
{
    EXPECT_THROW(build_grid(0, 3), InputError);
    EXPECT_THROW(build_grid(2, -1), InputError);
}

TEST(BlockCyclicMap, OwnerFormula)
{
    const BlockCyclicMap map(build_grid(4, 3), 20);
    EXPECT_EQ(map_block(5, 4, map), 4);    // row 1, col 1
    EXPECT_EQ(map_block(8, 6, map), 0);
    EXPECT_EQ(map_block(6, 8, map), 8);
    EXPECT_EQ(map_block(7, 5, map), 11);
    EXPECT_EQ(map_block(5, 7, map), 4);
    for (Index I = 0; I < 20; ++I)
        for (Index J = 0; J < 20; ++J)
            EXPECT_EQ(map_block(I, J, map), static_cast<Rank>((I % 4) * 3 + (J % 3)));
}

TEST(BlockCyclicMap, PeriodicInBothIndices)
{
    const BlockCyclicMap map(build_grid(2, 3), 10);
    for (Index I = 0; I + 2 < 10; ++I)
        for (Index J = 0; J + 3 < 10; ++J) {
            EXPECT_EQ(map.owner(I, J), map.owner(I + 2, J));
            EXPECT_EQ(map.owner(I, J), map.owner(I, J + 3));
        }
}

TEST(BlockCyclicMap, RangeChecks)
{
    const BlockCyclicMap map(build_grid(2, 2), 5);
    EXPECT_THROW(map.owner(5, 0), InputError);
    EXPECT_THROW(map.owner(0, -1), InputError);
    EXPECT_THROW(BlockCyclicMap(build_grid(1, 1), -1), InputError);
    const BlockCyclicMap empty(build_grid(1, 1), 0);
    EXPECT_THROW(empty.owner(0, 0), InputError);
}
