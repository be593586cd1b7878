#include "pselinv/comm_tree.hpp"

#include <algorithm>
#include <random>

#include <fmt/format.h>

#include "pselinv/errors.hpp"

namespace pselinv {

std::string_view to_string(TreeKind kind)
{
    switch (kind) {
    case TreeKind::Flat: return "flat";
    case TreeKind::Binary: return "binary";
    case TreeKind::ShiftedBinary: return "shifted";
    }
    return "unknown";
}

std::optional<TreeKind> parse_tree_kind(std::string_view s)
{
    if (s == "flat") return TreeKind::Flat;
    if (s == "binary") return TreeKind::Binary;
    if (s == "shifted" || s == "shifted-binary") return TreeKind::ShiftedBinary;
    return std::nullopt;
}

std::size_t CommTree::index_of(Rank r) const
{
    auto it = std::lower_bound(members_.begin(), members_.end(), r);
    if (it == members_.end() || *it != r)
        throw InputError(fmt::format("rank {} is not a member of this tree", r));
    return static_cast<std::size_t>(it - members_.begin());
}

bool CommTree::contains(Rank r) const { return std::binary_search(members_.begin(), members_.end(), r); }

std::span<const Rank> CommTree::children(Rank r) const { return children_[index_of(r)]; }

Rank CommTree::parent(Rank r) const { return parent_[index_of(r)]; }

class CommTreeBuilder {
public:
    CommTreeBuilder(TreeKind kind, Rank root, std::span<const Rank> members)
    {
        tree_.kind_ = kind;
        tree_.root_ = root;
        tree_.members_.assign(members.begin(), members.end());
        std::sort(tree_.members_.begin(), tree_.members_.end());
        if (std::adjacent_find(tree_.members_.begin(), tree_.members_.end()) != tree_.members_.end())
            throw InputError("duplicate ranks in a collective member list");
        if (!tree_.contains(root))
            throw InputError(fmt::format("root {} is not among the collective members", root));
        tree_.parent_.assign(tree_.members_.size(), -1);
        tree_.children_.assign(tree_.members_.size(), {});
        for (Rank r : tree_.members_)
            if (r != root) receivers_.push_back(r);
    }

    std::vector<Rank>& receivers() { return receivers_; }

    void link(Rank parent, Rank child)
    {
        tree_.children_[tree_.index_of(parent)].push_back(child);
        tree_.parent_[tree_.index_of(child)] = parent;
    }

    void split(Rank node, std::span<const Rank> list)
    {
        if (list.empty()) return;
        const std::size_t first = (list.size() + 1) / 2;
        auto front = list.first(first);
        auto back = list.subspan(first);
        link(node, front.front());
        if (!back.empty()) link(node, back.front());
        split(front.front(), front.subspan(1));
        if (!back.empty()) split(back.front(), back.subspan(1));
    }

    CommTree finish(std::uint64_t seed, std::size_t shift)
    {
        tree_.order_.clear();
        tree_.order_.push_back(tree_.root_);
        tree_.order_.insert(tree_.order_.end(), receivers_.begin(), receivers_.end());
        tree_.seed_ = seed;
        tree_.shift_ = shift;
        return std::move(tree_);
    }

private:
    CommTree tree_;
    std::vector<Rank> receivers_;
};

CommTree build_flat_tree(Rank root, std::span<const Rank> members)
{
    CommTreeBuilder b(TreeKind::Flat, root, members);
    for (Rank r : b.receivers()) b.link(root, r);
    return b.finish(0, 0);
}

CommTree build_binary_tree(Rank root, std::span<const Rank> members)
{
    CommTreeBuilder b(TreeKind::Binary, root, members);
    b.split(root, b.receivers());
    return b.finish(0, 0);
}

std::size_t shift_offset(std::uint64_t seed, std::size_t receivers)
{
    if (receivers == 0) return 0;
    std::mt19937_64 gen(seed);
    return static_cast<std::size_t>(gen() % receivers);
}

namespace {

CommTree shifted(Rank root, std::span<const Rank> members, std::uint64_t seed,
                 std::optional<std::size_t> offset)
{
    CommTreeBuilder b(TreeKind::ShiftedBinary, root, members);
    auto& list = b.receivers();
    const std::size_t k = list.empty() ? 0 : (offset ? *offset % list.size() : shift_offset(seed, list.size()));
    std::rotate(list.begin(), list.begin() + static_cast<std::ptrdiff_t>(k), list.end());
    b.split(root, list);
    return b.finish(seed, k);
}

}  // namespace

CommTree build_shifted_binary_tree(Rank root, std::span<const Rank> members, std::uint64_t seed)
{
    return shifted(root, members, seed, std::nullopt);
}

CommTree build_shifted_binary_tree_with_offset(Rank root, std::span<const Rank> members,
                                               std::size_t offset)
{
    return shifted(root, members, 0, offset);
}

CommTree build_tree(TreeKind kind, Rank root, std::span<const Rank> members, std::uint64_t seed)
{
    switch (kind) {
    case TreeKind::Flat: return build_flat_tree(root, members);
    case TreeKind::Binary: return build_binary_tree(root, members);
    case TreeKind::ShiftedBinary: return build_shifted_binary_tree(root, members, seed);
    }
    throw InputError("unknown tree kind");
}

TreeStats tree_stats(const CommTree& t)
{
    TreeStats s;
    std::vector<std::pair<Rank, std::size_t>> stack{{t.root(), 0}};
    while (!stack.empty()) {
        auto [node, depth] = stack.back();
        stack.pop_back();
        s.depth = std::max(s.depth, depth);
        auto kids = t.children(node);
        s.max_out_degree = std::max(s.max_out_degree, kids.size());
        if (node != t.root() && !kids.empty()) s.internal_nodes.push_back(node);
        for (Rank c : kids) stack.emplace_back(c, depth + 1);
    }
    std::sort(s.internal_nodes.begin(), s.internal_nodes.end());
    return s;
}

std::uint64_t derive_seed(std::uint64_t global, Index supernode, Index block, int collective)
{
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    std::uint64_t h = mix(global);
    h = mix(h ^ static_cast<std::uint64_t>(supernode));
    h = mix(h ^ static_cast<std::uint64_t>(block));
    h = mix(h ^ static_cast<std::uint64_t>(collective));
    return h;
}

}  // namespace pselinv
