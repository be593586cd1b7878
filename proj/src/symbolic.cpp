#include "pselinv/symbolic.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "pselinv/errors.hpp"

namespace pselinv {

bool FillPattern::contains(Index i, Index j) const
{
    if (i == j) return true;
    if (i < j) std::swap(i, j);
    return std::binary_search(below_[j].begin(), below_[j].end(), i);
}

Index FillPattern::lower_nnz() const noexcept
{
    Index total = 0;
    for (const auto& c : below_) total += static_cast<Index>(c.size());
    return total;
}

SupernodePartition::SupernodePartition(std::vector<Index> starts) : starts_(std::move(starts))
{
    if (starts_.empty() || starts_.front() != 0)
        throw InputError("supernode boundaries must start at column 0");
    for (std::size_t k = 1; k < starts_.size(); ++k)
        if (starts_[k] <= starts_[k - 1]) throw InputError("supernode boundaries not increasing");
    col_to_snode_.resize(static_cast<std::size_t>(starts_.back()));
    for (Index K = 0; K < count(); ++K)
        std::fill(col_to_snode_.begin() + start(K), col_to_snode_.begin() + end(K), K);
}

EliminationTree elimination_tree(const SparseMatrix& A)
{
    if (!A.is_pattern_symmetric())
        throw InputError("elimination tree requires a structurally symmetric pattern");

    const Index n = A.n();
    EliminationTree tree;
    tree.parent.assign(n, kNoParent);
    std::vector<Index> ancestor(n, kNoParent);

    for (Index k = 0; k < n; ++k) {
        for (Index i : A.column_rows(k)) {
            // upper triangle only: A(i,k) with i < k
            while (i != kNoParent && i < k) {
                const Index next = ancestor[i];
                ancestor[i] = k;
                if (next == kNoParent) tree.parent[i] = k;
                i = next;
            }
        }
    }

    std::vector<std::vector<Index>> children(n);
    std::vector<Index> roots;
    for (Index j = 0; j < n; ++j) {
        if (tree.parent[j] == kNoParent) roots.push_back(j);
        else children[tree.parent[j]].push_back(j);
    }
    tree.postorder.reserve(n);
    std::vector<std::pair<Index, std::size_t>> stack;
    for (Index root : roots) {
        stack.emplace_back(root, 0);
        while (!stack.empty()) {
            auto& [node, next_child] = stack.back();
            if (next_child < children[node].size()) {
                const Index child = children[node][next_child++];
                stack.emplace_back(child, 0);
            } else {
                tree.postorder.push_back(node);
                stack.pop_back();
            }
        }
    }
    return tree;
}

FillPattern symbolic_fill(const SparseMatrix& A, const EliminationTree& etree)
{
    const Index n = A.n();
    if (etree.size() != n) throw InputError("elimination tree does not match the matrix");

    std::vector<std::vector<Index>> below(n);
    std::vector<Index> mark(n, kNoParent);
    for (Index i = 0; i < n; ++i) {
        mark[i] = i;
        // row i of the lower triangle == column i above the diagonal
        for (Index k : A.column_rows(i)) {
            if (k >= i) break;
            for (Index j = k; mark[j] != i; j = etree.parent[j]) {
                if (j == kNoParent) throw InvariantError("row subtree escaped the elimination tree");
                below[j].push_back(i);
                mark[j] = i;
            }
        }
    }
    return FillPattern(std::move(below));
}

SupernodePartition detect_supernodes(const FillPattern& fill, Index max_size)
{
    if (max_size < 1) throw InputError("max supernode size must be at least 1");
    const Index n = fill.n();
    std::vector<Index> starts{0};
    if (n == 0) return SupernodePartition(starts);

    Index current = 0;
    for (Index j = 1; j < n; ++j) {
        auto prev = fill.column(j - 1);
        auto next = fill.column(j);
        auto tail = prev;
        if (!tail.empty() && tail.front() == j) tail = tail.subspan(1);
        const bool same = std::equal(tail.begin(), tail.end(), next.begin(), next.end());
        if (same && j - current < max_size) continue;
        starts.push_back(j);
        current = j;
    }
    starts.push_back(n);
    return SupernodePartition(std::move(starts));
}

std::vector<Index> ancestor_blocks(Index K, const FillPattern& fill, const SupernodePartition& part)
{
    if (K < 0 || K >= part.count()) throw InputError(fmt::format("supernode {} out of range", K));
    std::vector<Index> result;
    // columns of one supernode share their structure below it, so the last
    // column carries the whole block set
    for (Index row : fill.column(part.end(K) - 1)) {
        const Index I = part.snode_of(row);
        if (result.empty() || result.back() != I) result.push_back(I);
    }
    return result;
}

long PanelLayout::find(Index I) const
{
    auto it = std::lower_bound(blocks.begin(), blocks.end(), I,
                               [](const Block& b, Index s) { return b.snode < s; });
    if (it == blocks.end() || it->snode != I) return -1;
    return it - blocks.begin();
}

BlockLayout::BlockLayout(const FillPattern& fill, SupernodePartition part) : part_(std::move(part))
{
    if (fill.n() != part_.n()) throw InputError("partition does not match the fill pattern");
    panels_.resize(static_cast<std::size_t>(part_.count()));
    for (Index K = 0; K < part_.count(); ++K) {
        PanelLayout& panel = panels_[K];
        auto rows = fill.column(part_.end(K) - 1);
        panel.rows.assign(rows.begin(), rows.end());
        for (std::size_t p = 0; p < panel.rows.size(); ++p) {
            const Index I = part_.snode_of(panel.rows[p]);
            if (panel.blocks.empty() || panel.blocks.back().snode != I)
                panel.blocks.push_back({I, p, 0});
            ++panel.blocks.back().count;
        }
    }
}

Index BlockLayout::parent(Index K) const
{
    const auto& blocks = panels_[K].blocks;
    return blocks.empty() ? kNoParent : blocks.front().snode;
}

SymbolicAnalysis analyze(const SparseMatrix& A, Index max_size)
{
    SymbolicAnalysis s;
    s.etree = elimination_tree(A);
    s.fill = symbolic_fill(A, s.etree);
    s.layout = BlockLayout(s.fill, detect_supernodes(s.fill, max_size));
    return s;
}

}  // namespace pselinv
