#include "pselinv/grid.hpp"

#include <fmt/format.h>

#include "pselinv/errors.hpp"

namespace pselinv {

ProcessGrid::ProcessGrid(int pr, int pc) : pr_(pr), pc_(pc)
{
    if (pr < 1 || pc < 1) throw InputError(fmt::format("invalid process grid {}x{}", pr, pc));
}

ProcessGrid build_grid(int pr, int pc) { return ProcessGrid(pr, pc); }

BlockCyclicMap::BlockCyclicMap(ProcessGrid grid, Index supernodes)
    : grid_(grid), supernodes_(supernodes)
{
    if (supernodes < 0) throw InputError("negative supernode count");
}

Rank BlockCyclicMap::owner(Index I, Index J) const
{
    if (I < 0 || J < 0 || I >= supernodes_ || J >= supernodes_)
        throw InputError(fmt::format("block ({}, {}) outside a {}-supernode layout", I, J, supernodes_));
    return grid_.rank(static_cast<int>(I % grid_.pr()), static_cast<int>(J % grid_.pc()));
}

Rank map_block(Index I, Index J, const BlockCyclicMap& map) { return map.owner(I, J); }

}  // namespace pselinv
