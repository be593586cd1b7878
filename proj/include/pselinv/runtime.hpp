#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "pselinv/comm_tree.hpp"
#include "pselinv/factor.hpp"
#include "pselinv/grid.hpp"
#include "pselinv/ledger.hpp"
#include "pselinv/selinv.hpp"
#include "pselinv/symbolic.hpp"

namespace pselinv {

/// How rank workers are driven.
enum class Schedule {
    RoundRobin,  // single thread, one inbox message per rank per round
    Randomized,  // single thread, random (rank, sender) queue each step
    Threaded,    // worker threads multiplexing ranks
};

struct RuntimeOptions {
    TreeKind tree = TreeKind::ShiftedBinary;
    std::uint64_t seed = 0;
    Schedule schedule = Schedule::RoundRobin;
    unsigned threads = 1;             // Threaded only; capped at the rank count
    std::uint64_t delivery_seed = 0;  // Randomized only
    bool detect_deadlock = true;
    /// Fault injection: messages with this tag are logged but never delivered.
    std::optional<Tag> drop_tag;
};

/// Symbolic analysis plus the normalized factor of a symmetric matrix:
/// everything the ranks share read-only.
struct PreparedProblem {
    SymbolicAnalysis symbolic;
    std::shared_ptr<const SupFactorization> factor;  // normalized
    Index n = 0;
};

/// Analysis, factorization and the normalization pass. Throws InputError
/// when A is not numerically symmetric.
PreparedProblem prepare_problem(const SparseMatrix& A, Index max_size = kDefaultMaxSupernode);

/// One restricted collective of a run.
struct CollectiveInfo {
    Tag tag;          // ColBcast, RowReduce or DiagUpdate
    Index supernode;  // K
    Index block;      // I for ColBcast, J for RowReduce, K for DiagUpdate
    CommTree tree;
};

struct ParallelRun {
    SelInvResult result;
    CommLedger ledger;
    std::vector<CollectiveInfo> collectives;
};

/// Emulated distributed selected inversion: one state machine per rank,
/// message passing only, progress driven by data dependencies.
ParallelRun run_parallel_selinv(const PreparedProblem& problem, const ProcessGrid& grid,
                                const RuntimeOptions& options);
ParallelRun run_parallel_selinv(const SparseMatrix& A, const ProcessGrid& grid,
                                const RuntimeOptions& options,
                                Index max_size = kDefaultMaxSupernode);

// Stand-alone collectives, used by the runtime's planning and by tests.

/// Ranks in the owner's grid column holding Ainv(J, I) for some J in `blocks`,
/// plus the owner itself, ascending.
std::vector<Rank> col_bcast_group(Rank owner, Index I, std::span<const Index> blocks,
                                  const BlockCyclicMap& map);

/// Broadcasts `panel` from `owner` over the tree; every edge logs one
/// ColBcast message. Returns the copy each member ends up holding.
std::map<Rank, Dense> col_bcast(Rank owner, std::span<const Rank> subset, const Dense& panel,
                                TreeKind kind, std::uint64_t seed, const ProcessGrid& grid,
                                CommLedger& ledger, Index supernode = 0, Index block = 0);

/// Sums `partials` toward `target` over the reversed tree; every edge logs
/// one RowReduce message of a partial's size. The sum is taken over
/// contributions in ascending rank order, so it does not depend on the
/// tree shape.
Dense row_reduce(Rank target, std::span<const Rank> subset, const std::map<Rank, Dense>& partials,
                 TreeKind kind, std::uint64_t seed, const ProcessGrid& grid, CommLedger& ledger,
                 Index supernode = 0, Index block = 0);

/// Left-to-right sum of contributions ordered by rank.
Dense sum_by_rank(std::vector<std::pair<Rank, Dense>> contributions);

/// Sends Lhat(I,K) from its owner to the owner of Uhat(K,I), which stores
/// the transpose. Local (no message) when both owners coincide.
struct Handoff {
    Rank from;
    Rank to;
    Dense stored;  // Lhat(I,K)^T
};
Handoff transpose_handoff(const Dense& lhat, Index I, Index K, const BlockCyclicMap& map,
                          bool symmetric, CommLedger& ledger);

/// Collective tag values fed into derive_seed.
inline constexpr int kSeedColBcast = 1;
inline constexpr int kSeedRowReduce = 2;
inline constexpr int kSeedDiagReduce = 3;

}  // namespace pselinv
