#pragma once

#include <span>
#include <vector>

#include "pselinv/sparse_matrix.hpp"

namespace pselinv {

inline constexpr Index kNoParent = -1;

struct EliminationTree {
    std::vector<Index> parent;     // kNoParent for roots
    std::vector<Index> postorder;  // postorder[k] = k-th column visited

    Index size() const noexcept { return static_cast<Index>(parent.size()); }
};

/// Strictly-lower structure of the filled factor, column by column.
/// The upper factor has the transposed structure.
class FillPattern {
public:
    FillPattern() = default;
    explicit FillPattern(std::vector<std::vector<Index>> below) : below_(std::move(below)) {}

    Index n() const noexcept { return static_cast<Index>(below_.size()); }
    std::span<const Index> column(Index j) const { return below_[j]; }
    bool contains(Index i, Index j) const;
    /// Number of strictly-lower entries.
    Index lower_nnz() const noexcept;

    friend bool operator==(const FillPattern&, const FillPattern&) = default;

private:
    std::vector<std::vector<Index>> below_;
};

/// Contiguous column ranges [start(K), end(K)).
class SupernodePartition {
public:
    SupernodePartition() = default;
    explicit SupernodePartition(std::vector<Index> starts);

    Index count() const noexcept { return static_cast<Index>(starts_.size()) - 1; }
    Index n() const noexcept { return starts_.back(); }
    Index start(Index K) const { return starts_[K]; }
    Index end(Index K) const { return starts_[K + 1]; }
    Index width(Index K) const { return starts_[K + 1] - starts_[K]; }
    Index snode_of(Index col) const { return col_to_snode_[col]; }

    /// Supernode start columns (without the trailing n).
    std::span<const Index> boundaries() const { return std::span(starts_).first(starts_.size() - 1); }

    friend bool operator==(const SupernodePartition& a, const SupernodePartition& b)
    {
        return a.starts_ == b.starts_;
    }

private:
    std::vector<Index> starts_{0};
    std::vector<Index> col_to_snode_;
};

inline constexpr Index kDefaultMaxSupernode = 48;

/// Liu's algorithm with path compression. Throws InputError when the
/// pattern is not structurally symmetric.
EliminationTree elimination_tree(const SparseMatrix& A);

/// Row-subtree traversal of the elimination tree.
FillPattern symbolic_fill(const SparseMatrix& A, const EliminationTree& etree);

/// Greedy left-to-right merge of columns whose below-supernode structure
/// matches, capped at max_size columns.
SupernodePartition detect_supernodes(const FillPattern& fill, Index max_size);

/// Supernodes I > K with a nonzero block L(I,K), ascending.
std::vector<Index> ancestor_blocks(Index K, const FillPattern& fill,
                                   const SupernodePartition& part);

/// Row structure of one supernode's off-diagonal panel, split by the
/// supernode that owns each row.
struct PanelLayout {
    struct Block {
        Index snode;             // row supernode I (or column supernode J on the U side)
        std::size_t offset;      // first row in `rows`
        std::size_t count;
    };
    std::vector<Index> rows;     // global rows below the supernode, ascending
    std::vector<Block> blocks;   // ascending snode

    std::span<const Index> block_rows(std::size_t b) const
    {
        return std::span(rows).subspan(blocks[b].offset, blocks[b].count);
    }
    /// Position of supernode I in `blocks`, or -1.
    long find(Index I) const;
};

/// Block layout of the whole factor: one PanelLayout per supernode.
class BlockLayout {
public:
    BlockLayout() = default;
    BlockLayout(const FillPattern& fill, SupernodePartition part);

    const SupernodePartition& partition() const noexcept { return part_; }
    Index count() const noexcept { return part_.count(); }
    const PanelLayout& panel(Index K) const { return panels_[K]; }

    /// Block-level elimination tree: parent supernode, or kNoParent.
    Index parent(Index K) const;

private:
    SupernodePartition part_;
    std::vector<PanelLayout> panels_;
};

/// Convenience bundle: etree, fill, partition, layout.
struct SymbolicAnalysis {
    EliminationTree etree;
    FillPattern fill;
    BlockLayout layout;
};

SymbolicAnalysis analyze(const SparseMatrix& A, Index max_size = kDefaultMaxSupernode);

}  // namespace pselinv
