#pragma once

#include <vector>

#include "pselinv/symbolic.hpp"

namespace pselinv {

using Rank = int;

/// Pr x Pc virtual process grid, ranks numbered row-major.
class ProcessGrid {
public:
    ProcessGrid(int pr, int pc);

    int pr() const noexcept { return pr_; }
    int pc() const noexcept { return pc_; }
    int size() const noexcept { return pr_ * pc_; }

    Rank rank(int row, int col) const noexcept { return row * pc_ + col; }
    int row_of(Rank r) const noexcept { return r / pc_; }
    int col_of(Rank r) const noexcept { return r % pc_; }

    friend bool operator==(const ProcessGrid&, const ProcessGrid&) = default;

private:
    int pr_;
    int pc_;
};

ProcessGrid build_grid(int pr, int pc);

/// 2D block-cyclic ownership of supernodal blocks. Only nonzero blocks are
/// ever stored, but the map itself ignores sparsity.
class BlockCyclicMap {
public:
    BlockCyclicMap(ProcessGrid grid, Index supernodes);

    const ProcessGrid& grid() const noexcept { return grid_; }
    Index supernodes() const noexcept { return supernodes_; }

    Rank owner(Index I, Index J) const;

private:
    ProcessGrid grid_;
    Index supernodes_;
};

/// owner(I, J) = (I mod pr) * pc + (J mod pc); throws InputError when I or J
/// is not a valid supernode index.
Rank map_block(Index I, Index J, const BlockCyclicMap& map);

}  // namespace pselinv
