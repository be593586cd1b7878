#include "pselinv/runtime.hpp"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <deque>
#include <exception>
#include <functional>
#include <mutex>
#include <random>
#include <thread>
#include <tuple>

#include <fmt/format.h>

#include "pselinv/errors.hpp"

namespace pselinv {

namespace {

using BlockKey = std::pair<Index, Index>;

struct Message {
    Rank src = 0;
    Rank dst = 0;
    Tag tag = Tag::LPanel;
    Index supernode = 0;
    Index block = 0;
    std::uint64_t entries = 0;  // accounted payload size
    Dense payload;
    std::vector<std::pair<Rank, Dense>> contributions;  // reductions only
};

using Post = std::function<void(Message&&)>;

/// Trees and member sets for every collective, fixed before any rank runs.
struct Plan {
    struct Snode {
        std::vector<CommTree> bcast;      // per block b: Col-Bcast of Lhat(C[b], K)
        std::vector<CommTree> rowreduce;  // per block b: Row-Reduce into Ainv(C[b], K)
        std::vector<std::vector<Rank>> row_contributors;
        CommTree diag;
        std::vector<Rank> diag_contributors;
    };

    const BlockLayout* layout = nullptr;
    const SupFactorization* factor = nullptr;
    BlockCyclicMap map;
    std::vector<Snode> snodes;

    Plan(const SupFactorization& f, const ProcessGrid& grid, const RuntimeOptions& opt)
        : layout(&f.layout()), factor(&f), map(grid, f.count())
    {
        snodes.resize(static_cast<std::size_t>(f.count()));
        for (Index K = 0; K < f.count(); ++K) {
            const auto& panel = layout->panel(K);
            std::vector<Index> C;
            for (const auto& blk : panel.blocks) C.push_back(blk.snode);
            Snode& s = snodes[K];
            for (Index I : C) {
                const Rank root = map.owner(K, I);
                auto members = col_bcast_group(root, I, C, map);
                s.bcast.push_back(build_tree(opt.tree, root, members,
                                             derive_seed(opt.seed, K, I, kSeedColBcast)));
            }
            for (Index J : C) {
                const Rank target = map.owner(J, K);
                std::vector<Rank> contributors;
                for (Index I : C) contributors.push_back(map.owner(J, I));
                std::sort(contributors.begin(), contributors.end());
                contributors.erase(std::unique(contributors.begin(), contributors.end()), contributors.end());
                auto members = contributors;
                if (!std::binary_search(members.begin(), members.end(), target)) {
                    members.insert(std::lower_bound(members.begin(), members.end(), target), target);
                }
                s.rowreduce.push_back(build_tree(opt.tree, target, members,
                                                 derive_seed(opt.seed, K, J, kSeedRowReduce)));
                s.row_contributors.push_back(std::move(contributors));
            }
            const Rank diag_owner = map.owner(K, K);
            for (Index J : C) s.diag_contributors.push_back(map.owner(J, K));
            std::sort(s.diag_contributors.begin(), s.diag_contributors.end());
            s.diag_contributors.erase(std::unique(s.diag_contributors.begin(), s.diag_contributors.end()),
                                      s.diag_contributors.end());
            auto members = s.diag_contributors;
            if (!std::binary_search(members.begin(), members.end(), diag_owner))
                members.insert(std::lower_bound(members.begin(), members.end(), diag_owner), diag_owner);
            s.diag = build_tree(opt.tree, diag_owner, members, derive_seed(opt.seed, K, K, kSeedDiagReduce));
        }
    }
};

/// One emulated rank. Owns its Ainv blocks and received panels; reads only
/// the factor blocks mapped to it.
class RankState {
public:
    RankState(Rank r, const Plan& plan, std::atomic<long>& remaining)
        : rank_(r), plan_(plan), remaining_(remaining)
    {
        const auto& layout = *plan.layout;
        for (Index K = 0; K < layout.count(); ++K) {
            const auto& panel = layout.panel(K);
            const auto& s = plan.snodes[K];
            const std::size_t nb = panel.blocks.size();

            for (std::size_t b = 0; b < nb; ++b) {
                if (s.bcast[b].contains(r)) expect(K);  // panel reception
                if (owner(K, panel.blocks[b].snode) == r) expect(K);  // Ainv(K,J) handoff
            }

            for (std::size_t b = 0; b < nb; ++b) {
                const Index J = panel.blocks[b].snode;
                const bool contributor = std::binary_search(s.row_contributors[b].begin(),
                                                            s.row_contributors[b].end(), r);
                if (contributor) {
                    Product p{K, b, {}, 0};
                    for (std::size_t a = 0; a < nb; ++a) {
                        const Index I = panel.blocks[a].snode;
                        if (owner(J, I) != r) continue;
                        p.inputs.push_back(a);
                        wait_on({kPanel, K, I}, Task{false, products_.size()});
                        wait_on({kFinal, J, I}, Task{false, products_.size()});
                        p.remaining += 2;
                    }
                    products_.push_back(std::move(p));
                    expect(K);
                }
                if (s.rowreduce[b].contains(r)) {
                    add_node(Tag::RowReduce, K, b, s.rowreduce[b], contributor);
                }
            }

            const bool diag_contributor =
                std::binary_search(s.diag_contributors.begin(), s.diag_contributors.end(), r);
            if (diag_contributor) {
                DiagProduct d{K, {}, 0};
                for (std::size_t b = 0; b < nb; ++b) {
                    const Index J = panel.blocks[b].snode;
                    if (owner(J, K) != r) continue;
                    d.blocks.push_back(b);
                    wait_on({kFinal, J, K}, Task{true, diag_products_.size()});
                    ++d.remaining;
                }
                diag_products_.push_back(std::move(d));
                expect(K);
            }
            if (s.diag.contains(r)) add_node(Tag::DiagUpdate, K, nb, s.diag, diag_contributor);
        }
    }

    void start(const Post& post)
    {
        const auto& layout = *plan_.layout;
        for (Index K = 0; K < layout.count(); ++K) {
            const auto& panel = layout.panel(K);
            for (std::size_t b = 0; b < panel.blocks.size(); ++b) {
                const Index I = panel.blocks[b].snode;
                if (owner(I, K) != rank_) continue;
                const Dense& lhat = plan_.factor->snode(K).lower[b];
                Message m;
                m.src = rank_;
                m.dst = owner(K, I);
                m.tag = Tag::LPanel;
                m.supernode = K;
                m.block = I;
                m.entries = lhat.size();
                m.payload = lhat;
                post(std::move(m));
            }
        }
        for (std::size_t i = 0; i < nodes_.size(); ++i)
            if (nodes_[i].remaining == 0) fire_node(i, post);
    }

    void handle(Message m, const Post& post)
    {
        switch (m.tag) {
        case Tag::LPanel:
            // the owner of Uhat(K,I) overwrites it with Lhat(I,K)^T
            receive_panel(m.supernode, m.block, m.payload.transposed(), post);
            break;
        case Tag::ColBcast:
            receive_panel(m.supernode, m.block, std::move(m.payload), post);
            break;
        case Tag::RowReduce:
        case Tag::DiagUpdate: {
            const std::size_t b = m.tag == Tag::RowReduce ? block_index(m.supernode, m.block)
                                                          : plan_.layout->panel(m.supernode).blocks.size();
            const std::size_t i = node_index(m.tag, m.supernode, b);
            auto& node = nodes_[i];
            for (auto& c : m.contributions) node.contributions.push_back(std::move(c));
            if (--node.remaining == 0) fire_node(i, post);
            break;
        }
        case Tag::UPanel:
            ainv_[{m.supernode, m.block}] = std::move(m.payload);
            finish(m.supernode);
            notify({kFinal, m.supernode, m.block}, post);
            break;
        }
    }

    bool complete() const noexcept { return done_ == expected_; }

    /// Largest supernode with outstanding work, or -1.
    Index stalled_supernode() const
    {
        for (auto it = outstanding_.rbegin(); it != outstanding_.rend(); ++it)
            if (it->second > 0) return it->first;
        return -1;
    }

    const std::map<BlockKey, Dense>& ainv() const noexcept { return ainv_; }

private:
    static constexpr int kPanel = 0;
    static constexpr int kFinal = 1;

    struct Key {
        int type;
        Index a;
        Index b;
        auto operator<=>(const Key&) const = default;
    };
    struct Task {
        bool diag;
        std::size_t index;
    };
    struct Product {
        Index K;
        std::size_t b;
        std::vector<std::size_t> inputs;  // block indices a with owner(C[b], C[a]) == rank
        int remaining;
    };
    struct DiagProduct {
        Index K;
        std::vector<std::size_t> blocks;
        int remaining;
    };
    struct Node {
        Tag tag;
        Index K;
        std::size_t b;  // block index, or the block count for the diagonal reduction
        const CommTree* tree;
        int remaining;
        std::vector<std::pair<Rank, Dense>> contributions;
    };

    Rank owner(Index I, Index J) const { return plan_.map.owner(I, J); }

    void expect(Index K)
    {
        ++expected_;
        ++outstanding_[K];
        remaining_.fetch_add(1, std::memory_order_relaxed);
    }

    void finish(Index K)
    {
        ++done_;
        --outstanding_[K];
        remaining_.fetch_sub(1, std::memory_order_relaxed);
    }

    void wait_on(Key k, Task t) { waiters_[k].push_back(t); }

    void add_node(Tag tag, Index K, std::size_t b, const CommTree& tree, bool contributor)
    {
        const int deps = static_cast<int>(tree.children(rank_).size()) + (contributor ? 1 : 0);
        node_lookup_[{tag, K, b}] = nodes_.size();
        nodes_.push_back({tag, K, b, &tree, deps, {}});
        expect(K);
    }

    std::size_t node_index(Tag tag, Index K, std::size_t b) const
    {
        auto it = node_lookup_.find({tag, K, b});
        if (it == node_lookup_.end())
            throw InvariantError(fmt::format("rank {} received {} for supernode {} outside its tree",
                                             rank_, to_string(tag), K));
        return it->second;
    }

    std::size_t block_index(Index K, Index I) const
    {
        const long b = plan_.layout->panel(K).find(I);
        if (b < 0) throw InvariantError(fmt::format("block {} not in supernode {}", I, K));
        return static_cast<std::size_t>(b);
    }

    void receive_panel(Index K, Index I, Dense uhat, const Post& post)
    {
        const std::size_t b = block_index(K, I);
        const CommTree& tree = plan_.snodes[K].bcast[b];
        for (Rank child : tree.children(rank_)) {
            Message m;
            m.src = rank_;
            m.dst = child;
            m.tag = Tag::ColBcast;
            m.supernode = K;
            m.block = I;
            m.entries = uhat.size();
            m.payload = uhat;
            post(std::move(m));
        }
        uhat_[{K, I}] = std::move(uhat);
        finish(K);
        notify({kPanel, K, I}, post);
    }

    void notify(Key k, const Post& post)
    {
        auto it = waiters_.find(k);
        if (it == waiters_.end()) return;
        auto tasks = std::move(it->second);
        waiters_.erase(it);
        for (Task t : tasks) {
            if (t.diag) {
                if (--diag_products_[t.index].remaining == 0) run_diag_product(t.index, post);
            } else {
                if (--products_[t.index].remaining == 0) run_product(t.index, post);
            }
        }
    }

    // Ainv(J,K) partial: sum over local I of Ainv(J,I) Lhat(I,K)
    void run_product(std::size_t idx, const Post& post)
    {
        const Product& p = products_[idx];
        const auto& layout = *plan_.layout;
        const auto& panel = layout.panel(p.K);
        const Index J = panel.blocks[p.b].snode;
        auto rows_j = panel.block_rows(p.b);
        Dense partial(rows_j.size(), static_cast<std::size_t>(layout.partition().width(p.K)));
        for (std::size_t a : p.inputs) {
            const Index I = panel.blocks[a].snode;
            Dense sub = gather_from_block(layout, J, rows_j, I, panel.block_rows(a), ainv_.at({J, I}));
            gemm(1.0, sub, Op::None, uhat_.at({p.K, I}), Op::Trans, partial);
        }
        finish(p.K);
        contribute(node_index(Tag::RowReduce, p.K, p.b), std::move(partial), post);
    }

    // Lhat(J,K)^T Ainv(J,K) summed over the local J
    void run_diag_product(std::size_t idx, const Post& post)
    {
        const DiagProduct& d = diag_products_[idx];
        const auto& panel = plan_.layout->panel(d.K);
        const SupernodeFactor& fk = plan_.factor->snode(d.K);
        const std::size_t w = fk.L_diag.rows();
        Dense partial(w, w);
        for (std::size_t b : d.blocks)
            gemm(1.0, fk.lower[b], Op::Trans, ainv_.at({panel.blocks[b].snode, d.K}), Op::None, partial);
        finish(d.K);
        contribute(node_index(Tag::DiagUpdate, d.K, panel.blocks.size()), std::move(partial), post);
    }

    void contribute(std::size_t node, Dense partial, const Post& post)
    {
        nodes_[node].contributions.emplace_back(rank_, std::move(partial));
        if (--nodes_[node].remaining == 0) fire_node(node, post);
    }

    void fire_node(std::size_t idx, const Post& post)
    {
        Node& node = nodes_[idx];
        const auto& layout = *plan_.layout;
        const auto& panel = layout.panel(node.K);
        const auto w = static_cast<std::size_t>(layout.partition().width(node.K));
        finish(node.K);

        if (node.tree->root() != rank_) {
            Message m;
            m.src = rank_;
            m.dst = node.tree->parent(rank_);
            m.tag = node.tag;
            m.supernode = node.K;
            m.block = node.tag == Tag::RowReduce ? panel.blocks[node.b].snode : node.K;
            m.entries = node.tag == Tag::RowReduce ? panel.blocks[node.b].count * w : w * w;
            m.contributions = std::move(node.contributions);
            post(std::move(m));
            return;
        }

        if (node.tag == Tag::RowReduce) {
            const Index J = panel.blocks[node.b].snode;
            Dense total = sum_by_rank(std::move(node.contributions));
            Dense result(total.rows(), total.cols());
            axpy(-1.0, total, result);

            Message m;
            m.src = rank_;
            m.dst = owner(node.K, J);
            m.tag = Tag::UPanel;
            m.supernode = node.K;
            m.block = J;
            m.entries = result.size();
            m.payload = result.transposed();
            post(std::move(m));

            ainv_[{J, node.K}] = std::move(result);
            notify({kFinal, J, node.K}, post);
            return;
        }

        const SupernodeFactor& fk = plan_.factor->snode(node.K);
        Dense diag = inverse_of_diag_lu(fk.L_diag, fk.U_diag);
        if (!node.contributions.empty()) axpy(-1.0, sum_by_rank(std::move(node.contributions)), diag);
        ainv_[{node.K, node.K}] = std::move(diag);
        notify({kFinal, node.K, node.K}, post);
    }

    Rank rank_;
    const Plan& plan_;
    std::atomic<long>& remaining_;

    std::map<BlockKey, Dense> ainv_;
    std::map<BlockKey, Dense> uhat_;  // (K, I) -> Lhat(I,K)^T
    std::map<Key, std::vector<Task>> waiters_;
    std::vector<Product> products_;
    std::vector<DiagProduct> diag_products_;
    std::vector<Node> nodes_;
    std::map<std::tuple<Tag, Index, std::size_t>, std::size_t> node_lookup_;
    std::map<Index, long> outstanding_;
    long expected_ = 0;
    long done_ = 0;
};

[[noreturn]] void report_deadlock(const std::vector<std::unique_ptr<RankState>>& states)
{
    Index stalled = -1;
    Rank where = -1;
    for (std::size_t r = 0; r < states.size(); ++r) {
        const Index K = states[r]->stalled_supernode();
        if (K > stalled) {
            stalled = K;
            where = static_cast<Rank>(r);
        }
    }
    throw InvariantError(fmt::format(
        "deadlock: no runnable work while supernode {} (rank {}) still has pending dependencies",
        stalled, where));
}

bool dropped(const Message& m, const std::optional<Tag>& drop) { return drop && *drop == m.tag; }

void run_round_robin(std::vector<std::unique_ptr<RankState>>& states, CommLedger& ledger,
                     const std::atomic<long>& remaining, bool detect, std::optional<Tag> drop)
{
    std::vector<std::deque<Message>> inbox(states.size());
    Post post = [&](Message&& m) {
        if (m.src != m.dst) ledger.record(m.src, m.dst, m.tag, m.supernode, m.block, m.entries);
        if (dropped(m, drop)) return;
        inbox[m.dst].push_back(std::move(m));
    };
    for (auto& s : states) s->start(post);
    while (remaining.load() > 0) {
        bool progress = false;
        for (std::size_t r = 0; r < states.size(); ++r) {
            if (inbox[r].empty()) continue;
            Message m = std::move(inbox[r].front());
            inbox[r].pop_front();
            states[r]->handle(std::move(m), post);
            progress = true;
        }
        if (!progress && detect) report_deadlock(states);
    }
}

void run_randomized(std::vector<std::unique_ptr<RankState>>& states, CommLedger& ledger,
                    const std::atomic<long>& remaining, std::uint64_t delivery_seed, bool detect,
                    std::optional<Tag> drop)
{
    std::vector<Message> pool;
    Post post = [&](Message&& m) {
        if (m.src != m.dst) ledger.record(m.src, m.dst, m.tag, m.supernode, m.block, m.entries);
        if (dropped(m, drop)) return;
        pool.push_back(std::move(m));
    };
    std::mt19937_64 gen(delivery_seed);
    for (auto& s : states) s->start(post);
    while (remaining.load() > 0) {
        if (pool.empty()) {
            if (detect) report_deadlock(states);
            continue;
        }
        // pick any pending message, then deliver the oldest one on the same
        // (src, dst) channel so each sender's order is preserved
        const std::size_t pick = static_cast<std::size_t>(gen() % pool.size());
        std::size_t first = 0;
        while (pool[first].src != pool[pick].src || pool[first].dst != pool[pick].dst) ++first;
        Message m = std::move(pool[first]);
        pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(first));
        states[m.dst]->handle(std::move(m), post);
    }
}

void run_threaded(std::vector<std::unique_ptr<RankState>>& states, CommLedger& ledger,
                  const std::atomic<long>& remaining, unsigned threads, bool detect,
                  std::optional<Tag> drop)
{
    const auto p = states.size();
    const std::size_t workers = std::clamp<std::size_t>(threads, 1, p);

    std::mutex mutex;
    std::condition_variable cv;
    std::vector<std::deque<Message>> inbox(p);
    std::vector<std::size_t> pending(workers, 0);
    std::size_t in_flight = 0;
    std::size_t idle = 0;
    bool finished = false;
    bool deadlocked = false;
    std::exception_ptr error;

    Post post = [&](Message&& m) {
        std::lock_guard lock(mutex);
        if (m.src != m.dst) ledger.record(m.src, m.dst, m.tag, m.supernode, m.block, m.entries);
        if (dropped(m, drop)) return;
        ++in_flight;
        ++pending[static_cast<std::size_t>(m.dst) % workers];
        inbox[m.dst].push_back(std::move(m));
        cv.notify_all();
    };

    for (auto& s : states) s->start(post);

    auto stalled = [&] { return idle == workers && in_flight == 0; };

    auto worker = [&](std::size_t w) {
        for (;;) {
            bool any = false;
            for (std::size_t r = w; r < p; r += workers) {
                for (;;) {
                    Message m;
                    {
                        std::lock_guard lock(mutex);
                        if (finished || inbox[r].empty()) break;
                        m = std::move(inbox[r].front());
                        inbox[r].pop_front();
                    }
                    try {
                        states[r]->handle(std::move(m), post);
                    } catch (...) {
                        std::lock_guard lock(mutex);
                        if (!error) error = std::current_exception();
                        finished = true;
                        cv.notify_all();
                        return;
                    }
                    std::lock_guard lock(mutex);
                    --in_flight;
                    --pending[w];
                    if (in_flight == 0) cv.notify_all();
                    any = true;
                }
            }
            if (any) continue;

            std::unique_lock lock(mutex);
            if (finished) return;
            if (pending[w] > 0) continue;
            if (remaining.load() == 0 && in_flight == 0) {
                finished = true;
                cv.notify_all();
                return;
            }
            ++idle;
            if (stalled() && detect) {
                deadlocked = true;
                finished = true;
                cv.notify_all();
                return;
            }
            cv.wait(lock, [&] {
                return finished || pending[w] > 0 || (remaining.load() == 0 && in_flight == 0) ||
                       (detect && stalled());
            });
            --idle;
            if (finished) return;
        }
    };

    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker, w);
    for (auto& t : pool) t.join();

    if (error) std::rethrow_exception(error);
    if (deadlocked || remaining.load() > 0) report_deadlock(states);
}

}  // namespace

PreparedProblem prepare_problem(const SparseMatrix& A, Index max_size)
{
    if (!A.is_numerically_symmetric())
        throw InputError("parallel selected inversion requires a symmetric matrix");
    PreparedProblem p;
    p.n = A.n();
    p.symbolic = analyze(A, max_size);
    auto f = supernodal_lu(A, p.symbolic.layout.partition(), p.symbolic.fill);
    normalize_in_place(f);
    p.factor = std::make_shared<const SupFactorization>(std::move(f));
    return p;
}

ParallelRun run_parallel_selinv(const PreparedProblem& problem, const ProcessGrid& grid,
                                const RuntimeOptions& options)
{
    if (!problem.factor || !problem.factor->normalized())
        throw InvariantError("parallel run needs a normalized factorization");
    const SupFactorization& f = *problem.factor;
    const Plan plan(f, grid, options);

    std::atomic<long> remaining{0};
    std::vector<std::unique_ptr<RankState>> states;
    for (Rank r = 0; r < grid.size(); ++r) states.push_back(std::make_unique<RankState>(r, plan, remaining));

    ParallelRun run{SelInvResult(f.layout()), CommLedger(grid.size()), {}};
    switch (options.schedule) {
    case Schedule::RoundRobin:
        run_round_robin(states, run.ledger, remaining, options.detect_deadlock, options.drop_tag);
        break;
    case Schedule::Randomized:
        run_randomized(states, run.ledger, remaining, options.delivery_seed, options.detect_deadlock,
                       options.drop_tag);
        break;
    case Schedule::Threaded:
        run_threaded(states, run.ledger, remaining, options.threads, options.detect_deadlock, options.drop_tag);
        break;
    }
    for (const auto& s : states)
        if (!s->complete()) report_deadlock(states);

    // gather the distributed blocks
    const auto& layout = f.layout();
    std::size_t assigned = 0, total = 0;
    for (Index K = 0; K < layout.count(); ++K) total += 1 + 2 * layout.panel(K).blocks.size();
    for (Rank r = 0; r < grid.size(); ++r) {
        for (const auto& [key, block] : states[r]->ainv()) {
            const auto [X, Y] = key;
            if (plan.map.owner(X, Y) != r)
                throw InvariantError(fmt::format("rank {} wrote block ({}, {}) it does not own", r, X, Y));
            Dense* target = nullptr;
            if (X == Y) {
                target = &run.result.snode(X).diag;
            } else if (X > Y) {
                target = &run.result.snode(Y).lower[static_cast<std::size_t>(layout.panel(Y).find(X))];
            } else {
                target = &run.result.snode(X).upper[static_cast<std::size_t>(layout.panel(X).find(Y))];
            }
            if (target->rows() != block.rows() || target->cols() != block.cols())
                throw InvariantError(fmt::format("block ({}, {}) has the wrong shape", X, Y));
            *target = block;
            ++assigned;
        }
    }
    if (assigned != total)
        throw InvariantError(fmt::format("parallel run produced {} of {} blocks", assigned, total));

    for (Index K = 0; K < layout.count(); ++K) {
        const auto& s = plan.snodes[K];
        for (std::size_t b = 0; b < s.bcast.size(); ++b) {
            run.collectives.push_back({Tag::ColBcast, K, layout.panel(K).blocks[b].snode, s.bcast[b]});
            run.collectives.push_back({Tag::RowReduce, K, layout.panel(K).blocks[b].snode, s.rowreduce[b]});
        }
        run.collectives.push_back({Tag::DiagUpdate, K, K, s.diag});
    }
    return run;
}

ParallelRun run_parallel_selinv(const SparseMatrix& A, const ProcessGrid& grid,
                                const RuntimeOptions& options, Index max_size)
{
    return run_parallel_selinv(prepare_problem(A, max_size), grid, options);
}

std::vector<Rank> col_bcast_group(Rank owner, Index I, std::span<const Index> blocks,
                                  const BlockCyclicMap& map)
{
    std::vector<Rank> members{owner};
    for (Index J : blocks) members.push_back(map.owner(J, I));
    std::sort(members.begin(), members.end());
    members.erase(std::unique(members.begin(), members.end()), members.end());
    const int col = map.grid().col_of(owner);
    for (Rank r : members)
        if (map.grid().col_of(r) != col)
            throw InvariantError(fmt::format("rank {} is outside grid column {}", r, col));
    return members;
}

Dense sum_by_rank(std::vector<std::pair<Rank, Dense>> contributions)
{
    if (contributions.empty()) return {};
    std::sort(contributions.begin(), contributions.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    Dense total = std::move(contributions.front().second);
    for (std::size_t k = 1; k < contributions.size(); ++k) {
        const Dense& c = contributions[k].second;
        if (c.rows() != total.rows() || c.cols() != total.cols())
            throw InputError("reduction partials differ in shape");
        axpy(1.0, c, total);
    }
    return total;
}

std::map<Rank, Dense> col_bcast(Rank owner, std::span<const Rank> subset, const Dense& panel,
                                TreeKind kind, std::uint64_t seed, const ProcessGrid& grid,
                                CommLedger& ledger, Index supernode, Index block)
{
    if (subset.empty()) throw InputError("Col-Bcast needs a non-empty member set");
    std::vector<Rank> members(subset.begin(), subset.end());
    if (std::find(members.begin(), members.end(), owner) == members.end()) members.push_back(owner);
    for (Rank r : members) {
        if (r < 0 || r >= grid.size() || grid.col_of(r) != grid.col_of(owner))
            throw InputError(fmt::format("rank {} is not in the grid column of rank {}", r, owner));
    }
    const CommTree tree = build_tree(kind, owner, members, seed);

    std::map<Rank, Dense> held{{owner, panel}};
    std::vector<Rank> frontier{owner};
    while (!frontier.empty()) {
        const Rank node = frontier.back();
        frontier.pop_back();
        for (Rank child : tree.children(node)) {
            ledger.record(node, child, Tag::ColBcast, supernode, block, panel.size());
            held[child] = held.at(node);
            frontier.push_back(child);
        }
    }
    return held;
}

Dense row_reduce(Rank target, std::span<const Rank> subset, const std::map<Rank, Dense>& partials,
                 TreeKind kind, std::uint64_t seed, const ProcessGrid& grid, CommLedger& ledger,
                 Index supernode, Index block)
{
    if (partials.empty()) throw InputError("Row-Reduce needs at least one partial");
    std::vector<Rank> members(subset.begin(), subset.end());
    if (std::find(members.begin(), members.end(), target) == members.end()) members.push_back(target);
    for (Rank r : members) {
        if (r < 0 || r >= grid.size() || grid.row_of(r) != grid.row_of(target))
            throw InputError(fmt::format("rank {} is not in the grid row of rank {}", r, target));
    }
    const auto& shape = partials.begin()->second;
    for (const auto& [r, d] : partials) {
        if (std::find(members.begin(), members.end(), r) == members.end())
            throw InputError(fmt::format("partial from rank {} outside the reduction group", r));
        if (d.rows() != shape.rows() || d.cols() != shape.cols())
            throw InputError("reduction partials differ in shape");
    }
    const CommTree tree = build_tree(kind, target, members, seed);

    // children before parents: reverse of a preorder walk
    std::vector<Rank> preorder;
    std::vector<Rank> stack{target};
    while (!stack.empty()) {
        const Rank node = stack.back();
        stack.pop_back();
        preorder.push_back(node);
        for (Rank c : tree.children(node)) stack.push_back(c);
    }
    std::map<Rank, std::vector<std::pair<Rank, Dense>>> collected;
    for (auto it = preorder.rbegin(); it != preorder.rend(); ++it) {
        const Rank node = *it;
        auto& mine = collected[node];
        if (auto p = partials.find(node); p != partials.end()) mine.emplace_back(node, p->second);
        if (node == target) break;
        ledger.record(node, tree.parent(node), Tag::RowReduce, supernode, block, shape.size());
        auto& up = collected[tree.parent(node)];
        for (auto& c : mine) up.push_back(std::move(c));
    }
    return sum_by_rank(std::move(collected[target]));
}

Handoff transpose_handoff(const Dense& lhat, Index I, Index K, const BlockCyclicMap& map,
                          bool symmetric, CommLedger& ledger)
{
    if (!symmetric) throw InputError("transpose handoff is only defined for symmetric matrices");
    Handoff h{map.owner(I, K), map.owner(K, I), lhat.transposed()};
    if (h.from != h.to) ledger.record(h.from, h.to, Tag::LPanel, K, I, lhat.size());
    return h;
}

}  // namespace pselinv
