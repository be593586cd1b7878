#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pselinv/comm_tree.hpp"
#include "pselinv/grid.hpp"
#include "pselinv/runtime.hpp"
#include "pselinv/sparse_matrix.hpp"

namespace pselinv::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitVerification = 1,
    kExitInput = 2,
    kExitInvariant = 3,
};

struct RunConfig {
    std::optional<std::filesystem::path> matrix;
    std::optional<std::string> gen;
    std::optional<std::filesystem::path> perm;
    int pr = 1;
    int pc = 1;
    TreeKind tree = TreeKind::ShiftedBinary;
    std::uint64_t seed = 0;
    Index max_size = kDefaultMaxSupernode;
    std::optional<std::filesystem::path> out;
    bool verify = false;

    ProcessGrid grid() const { return ProcessGrid(pr, pc); }
    /// "lap2d:4x4" or the file name.
    std::string source() const;
};

struct ExperimentConfig {
    RunConfig run;
    std::vector<TreeKind> schemes{TreeKind::Flat, TreeKind::Binary, TreeKind::ShiftedBinary};
    std::size_t seeds = 6;
    std::size_t bins = 16;
};

/// Generator mini-language:
///   lap2d:NXxNY  tridiag:N  arrow:N  randdd:N[:SEED]  randdd-nonsym:N[:SEED]  zero:N
SparseMatrix generate_matrix(std::string_view spec);

/// "PRxPC" -> (pr, pc).
std::pair<int, int> parse_grid(std::string_view text);

/// Whitespace-separated 0-based indices, perm[new] = old.
std::vector<Index> read_permutation(const std::filesystem::path& path, Index n);

/// Reads or generates the matrix, applies --perm and symmetrizes the
/// pattern when needed. Throws InputError unless exactly one source is set.
SparseMatrix load_matrix(const RunConfig& config);

/// Runtime options for the configured tree and seed. SELINV_THREADS caps
/// the worker count; one worker selects the round-robin scheduler.
RuntimeOptions runtime_options(const RunConfig& config, int ranks);

int cmd_factorize(const RunConfig& config, std::ostream& out);
int cmd_invert(const RunConfig& config, std::ostream& out);
int cmd_verify(const RunConfig& config, std::ostream& out);
int cmd_experiment(const ExperimentConfig& config, std::ostream& out);

/// Parses arguments, dispatches, and maps exceptions to exit codes.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pselinv::cli
