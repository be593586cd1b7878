#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "pselinv/grid.hpp"

namespace pselinv {

enum class TreeKind { Flat, Binary, ShiftedBinary };

std::string_view to_string(TreeKind kind);
/// Accepts "flat", "binary", "shifted" (and "shifted-binary").
std::optional<TreeKind> parse_tree_kind(std::string_view s);

/// Rooted spanning tree over the ranks taking part in one restricted
/// broadcast (edges point away from the root) or reduction (data flows
/// toward the root).
class CommTree {
public:
    TreeKind kind() const noexcept { return kind_; }
    Rank root() const noexcept { return root_; }
    /// Member ranks, ascending.
    std::span<const Rank> members() const noexcept { return members_; }
    /// Root followed by the receiver list the tree was split from.
    std::span<const Rank> order() const noexcept { return order_; }
    std::uint64_t seed() const noexcept { return seed_; }
    std::size_t shift() const noexcept { return shift_; }

    bool contains(Rank r) const;
    std::span<const Rank> children(Rank r) const;
    /// -1 for the root.
    Rank parent(Rank r) const;
    std::size_t edge_count() const noexcept { return members_.size() - 1; }

private:
    friend class CommTreeBuilder;
    std::size_t index_of(Rank r) const;

    TreeKind kind_ = TreeKind::Flat;
    Rank root_ = 0;
    std::vector<Rank> members_;
    std::vector<Rank> order_;
    std::vector<Rank> parent_;               // aligned with members_
    std::vector<std::vector<Rank>> children_;  // aligned with members_
    std::uint64_t seed_ = 0;
    std::size_t shift_ = 0;
};

/// Root sends directly to every other member.
CommTree build_flat_tree(Rank root, std::span<const Rank> members);

/// Sort the members, drop the root, then repeatedly split the list in two
/// halves (the first half takes the extra element); the head of each half
/// becomes a child of the current node and roots the recursion on the rest
/// of its half.
CommTree build_binary_tree(Rank root, std::span<const Rank> members);

/// Binary tree on the receiver list rotated left by an offset drawn
/// uniformly from [0, |receivers|) with a generator seeded by `seed`.
CommTree build_shifted_binary_tree(Rank root, std::span<const Rank> members, std::uint64_t seed);

/// Same construction with an explicit rotation offset (taken mod |receivers|).
CommTree build_shifted_binary_tree_with_offset(Rank root, std::span<const Rank> members,
                                               std::size_t offset);

/// Offset the seeded generator draws for `receivers` ranks.
std::size_t shift_offset(std::uint64_t seed, std::size_t receivers);

CommTree build_tree(TreeKind kind, Rank root, std::span<const Rank> members, std::uint64_t seed);

struct TreeStats {
    std::size_t depth = 0;
    std::size_t max_out_degree = 0;
    std::vector<Rank> internal_nodes;  // neither root nor leaf, ascending
};

TreeStats tree_stats(const CommTree& t);

/// Seed for one tree: mixes the experiment seed, the supernode, the block
/// index and the collective tag.
std::uint64_t derive_seed(std::uint64_t global, Index supernode, Index block, int collective);

}  // namespace pselinv
