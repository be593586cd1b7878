#include "pselinv/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "pselinv/analysis.hpp"
#include "pselinv/errors.hpp"
#include "pselinv/factor.hpp"
#include "pselinv/selinv.hpp"
#include "pselinv/symbolic.hpp"

namespace pselinv::cli {

namespace {

inline constexpr double kVerifyTolerance = 1e-10;

template <class T>
T parse_number(std::string_view text, std::string_view what)
{
    T value{};
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end)
        throw InputError(fmt::format("invalid {} '{}'", what, text));
    return value;
}

std::vector<std::string_view> split(std::string_view text, char sep)
{
    std::vector<std::string_view> parts;
    std::size_t pos = 0;
    for (;;) {
        const auto next = text.find(sep, pos);
        parts.push_back(text.substr(pos, next - pos));
        if (next == std::string_view::npos) break;
        pos = next + 1;
    }
    return parts;
}

Index positive_dimension(std::string_view text, std::string_view spec)
{
    const auto v = parse_number<Index>(text, fmt::format("dimension in generator spec '{}'", spec));
    if (v < 1) throw InputError(fmt::format("generator spec '{}' needs a positive dimension", spec));
    return v;
}

void write_file(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw InputError(fmt::format("cannot open '{}' for writing", path.string()));
    f << text;
    if (!f) throw InputError(fmt::format("failed writing '{}'", path.string()));
}

std::filesystem::path prepare_out_dir(const std::filesystem::path& dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir))
        throw InputError(fmt::format("cannot create output directory '{}'", dir.string()));
    return dir;
}

Dense reconstruct_product(const SupFactorization& f, Index n)
{
    const auto& layout = f.layout();
    const auto& part = layout.partition();
    Dense L(static_cast<std::size_t>(n), static_cast<std::size_t>(n));
    Dense U(static_cast<std::size_t>(n), static_cast<std::size_t>(n));
    for (Index K = 0; K < f.count(); ++K) {
        const auto& fk = f.snode(K);
        const auto& panel = layout.panel(K);
        const auto s = static_cast<std::size_t>(part.start(K));
        const auto w = static_cast<std::size_t>(part.width(K));
        for (std::size_t j = 0; j < w; ++j) {
            for (std::size_t i = 0; i < w; ++i) {
                L(s + i, s + j) = fk.L_diag(i, j);
                U(s + i, s + j) = fk.U_diag(i, j);
            }
        }
        for (std::size_t b = 0; b < panel.blocks.size(); ++b) {
            auto rows = panel.block_rows(b);
            for (std::size_t r = 0; r < rows.size(); ++r) {
                for (std::size_t j = 0; j < w; ++j) {
                    L(static_cast<std::size_t>(rows[r]), s + j) = fk.lower[b](r, j);
                    U(s + j, static_cast<std::size_t>(rows[r])) = fk.upper[b](j, r);
                }
            }
        }
    }
    Dense LU(static_cast<std::size_t>(n), static_cast<std::size_t>(n));
    gemm(1.0, L, Op::None, U, Op::None, LU);
    return LU;
}

std::string describe_position(const SelInvResult& r, const ResultDiff& d)
{
    if (d.row < 0) return "none";
    const auto& part = r.layout().partition();
    return fmt::format("entry ({}, {}) in block ({}, {})", d.row, d.col, part.snode_of(d.row),
                       part.snode_of(d.col));
}

void print_stats(std::ostream& out, std::string_view label, const VolumeStats& s)
{
    out << fmt::format("{:<22} min {:.6f}  median {:.6f}  max {:.6f}  mean {:.6f}  stddev {:.6f} MB\n", label,
                       s.min, s.median, s.max, s.mean, s.stddev);
}

void write_selected(const SelInvResult& result, Index n, const std::filesystem::path& path)
{
    std::vector<Index> r, c;
    std::vector<double> v;
    result.for_each([&](Index i, Index j, double x) {
        r.push_back(i);
        c.push_back(j);
        v.push_back(x);
    });
    write_matrix_market(SparseMatrix::from_triplets(n, r, c, v), path);
}

}  // namespace

std::string RunConfig::source() const
{
    if (gen) return *gen;
    if (matrix) return matrix->filename().string();
    return {};
}

SparseMatrix generate_matrix(std::string_view spec)
{
    const auto colon = spec.find(':');
    if (colon == std::string_view::npos)
        throw InputError(fmt::format("generator spec '{}' lacks ':'", spec));
    const auto name = spec.substr(0, colon);
    const auto args = spec.substr(colon + 1);

    if (name == "lap2d") {
        const auto x = args.find('x');
        if (x == std::string_view::npos) throw InputError(fmt::format("expected lap2d:NXxNY, got '{}'", spec));
        return gen_laplacian_2d(positive_dimension(args.substr(0, x), spec),
                                positive_dimension(args.substr(x + 1), spec));
    }
    if (name == "tridiag") return gen_tridiagonal(positive_dimension(args, spec));
    if (name == "arrow") return gen_arrow(positive_dimension(args, spec));
    if (name == "zero") {
        const Index n = positive_dimension(args, spec);
        std::vector<Index> idx(static_cast<std::size_t>(n));
        for (Index k = 0; k < n; ++k) idx[static_cast<std::size_t>(k)] = k;
        std::vector<double> zeros(idx.size(), 0.0);
        return SparseMatrix::from_triplets(n, idx, idx, zeros);
    }
    if (name == "randdd" || name == "randdd-nonsym") {
        const auto parts = split(args, ':');
        if (parts.size() > 2) throw InputError(fmt::format("expected {}:N[:SEED], got '{}'", name, spec));
        const Index n = positive_dimension(parts[0], spec);
        const std::uint64_t seed = parts.size() == 2 ? parse_number<std::uint64_t>(parts[1], "generator seed") : 0;
        const double density = std::min(1.0, 6.0 / static_cast<double>(n));
        return gen_random_diag_dominant(n, density, seed, name == "randdd");
    }
    throw InputError(fmt::format("unknown generator '{}'", name));
}

std::pair<int, int> parse_grid(std::string_view text)
{
    const auto x = text.find('x');
    if (x == std::string_view::npos) throw InputError(fmt::format("expected PRxPC, got '{}'", text));
    const int pr = parse_number<int>(text.substr(0, x), "grid rows");
    const int pc = parse_number<int>(text.substr(x + 1), "grid columns");
    if (pr < 1 || pc < 1) throw InputError(fmt::format("grid '{}' must be at least 1x1", text));
    return {pr, pc};
}

std::vector<Index> read_permutation(const std::filesystem::path& path, Index n)
{
    std::ifstream in(path);
    if (!in) throw InputError(fmt::format("cannot open permutation '{}'", path.string()));
    std::vector<Index> perm;
    std::string token;
    while (in >> token) perm.push_back(parse_number<Index>(token, "permutation index"));
    if (static_cast<Index>(perm.size()) != n)
        throw InputError(fmt::format("permutation has {} entries, matrix has {} columns", perm.size(), n));
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    for (Index p : perm) {
        if (p < 0 || p >= n || seen[static_cast<std::size_t>(p)])
            throw InputError(fmt::format("'{}' is not a permutation of 0..{}", path.string(), n - 1));
        seen[static_cast<std::size_t>(p)] = true;
    }
    return perm;
}

SparseMatrix load_matrix(const RunConfig& config)
{
    if (config.matrix.has_value() == config.gen.has_value())
        throw InputError("give exactly one of --matrix or --gen");
    SparseMatrix A = config.gen ? generate_matrix(*config.gen) : read_matrix_market(*config.matrix);
    if (config.perm) A = A.permuted(read_permutation(*config.perm, A.n()));
    if (!A.is_pattern_symmetric()) A = symmetrize_pattern(A);
    return A;
}

RuntimeOptions runtime_options(const RunConfig& config, int ranks)
{
    unsigned cap = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("SELINV_THREADS"); env && *env) {
        cap = parse_number<unsigned>(env, "SELINV_THREADS");
        if (cap == 0) throw InputError("SELINV_THREADS must be positive");
    }
    RuntimeOptions opt;
    opt.tree = config.tree;
    opt.seed = config.seed;
    opt.threads = std::min(cap, static_cast<unsigned>(ranks));
    opt.schedule = opt.threads > 1 ? Schedule::Threaded : Schedule::RoundRobin;
    return opt;
}

int cmd_factorize(const RunConfig& config, std::ostream& out)
{
    const SparseMatrix A = load_matrix(config);
    const SymbolicAnalysis sym = analyze(A, config.max_size);
    const SupFactorization f = supernodal_lu(A, sym.layout.partition(), sym.fill);
    const auto& part = sym.layout.partition();

    Index widest = 0;
    for (Index K = 0; K < part.count(); ++K) widest = std::max(widest, part.width(K));
    Index roots = 0;
    for (Index p : sym.etree.parent) roots += p == kNoParent;

    out << fmt::format("matrix        {} (n = {}, nnz = {})\n", config.source(), A.n(), A.nnz());
    out << fmt::format("supernodes    {} (widest {}, cap {})\n", part.count(), widest, config.max_size);
    out << fmt::format("factor nnz    {} below the diagonal\n", sym.fill.lower_nnz());
    out << fmt::format("etree roots   {}\n", roots);

    int status = kExitOk;
    double residual = -1.0;
    if (config.verify) {
        if (A.n() > kOracleMaxDimension)
            throw InputError(fmt::format("--verify is limited to n <= {}", kOracleMaxDimension));
        Dense LU = reconstruct_product(f, A.n());
        axpy(-1.0, A.to_dense(), LU);
        residual = LU.max_abs() / std::max(A.max_abs(), 1e-300);
        out << fmt::format("max |LU - A| / max |A| = {:.3e}\n", residual);
        if (!(residual <= kVerifyTolerance)) {
            out << "FAILED: factor does not reproduce the matrix\n";
            status = kExitVerification;
        }
    }

    if (config.out) {
        const auto dir = prepare_out_dir(*config.out);
        nlohmann::ordered_json j;
        j["schema_version"] = kReportSchemaVersion;
        j["source"] = config.source();
        j["n"] = A.n();
        j["nnz"] = A.nnz();
        j["supernodes"] = part.count();
        j["max_supernode"] = config.max_size;
        j["widest_supernode"] = widest;
        j["factor_lower_nnz"] = sym.fill.lower_nnz();
        j["etree_roots"] = roots;
        std::vector<Index> starts(part.boundaries().begin(), part.boundaries().end());
        j["supernode_starts"] = starts;
        if (config.verify) j["relative_residual"] = residual;
        write_file(dir / "factorize.json", j.dump(2) + "\n");
    }
    return status;
}

int cmd_invert(const RunConfig& config, std::ostream& out)
{
    const SparseMatrix A = load_matrix(config);
    const ProcessGrid grid = config.grid();

    SelInvResult result;
    std::optional<ParallelRun> run;
    if (A.is_numerically_symmetric()) {
        run = run_parallel_selinv(prepare_problem(A, config.max_size), grid, runtime_options(config, grid.size()));
        result = run->result;
    } else {
        if (grid.size() > 1)
            throw InputError("the distributed run needs a symmetric matrix; use --grid 1x1 for general matrices");
        const SymbolicAnalysis sym = analyze(A, config.max_size);
        SupFactorization f = supernodal_lu(A, sym.layout.partition(), sym.fill);
        normalize_in_place(f);
        result = selected_inversion(f);
    }

    double trace = 0.0;
    std::size_t selected = 0;
    result.for_each([&](Index i, Index j, double v) {
        ++selected;
        if (i == j) trace += v;
    });
    out << fmt::format("matrix        {} (n = {}, nnz = {})\n", config.source(), A.n(), A.nnz());
    out << fmt::format("grid          {}x{}, tree {}, seed {}\n", grid.pr(), grid.pc(), to_string(config.tree),
                       config.seed);
    out << fmt::format("supernodes    {}\n", result.count());
    out << fmt::format("selected      {} entries, trace {:.12g}\n", selected, trace);
    if (run) {
        out << fmt::format("messages      {} ({} payload bytes)\n", run->ledger.events().size(),
                           run->ledger.total(Direction::Sent, VolumeKind::All));
        print_stats(out, "colbcast sent", volume_stats(run->ledger, Direction::Sent, VolumeKind::ColBcast));
        print_stats(out, "rowreduce received",
                    volume_stats(run->ledger, Direction::Received, VolumeKind::RowReduce));
    }

    int status = kExitOk;
    if (config.verify) {
        if (A.n() > kOracleMaxDimension)
            throw InputError(fmt::format("--verify is limited to n <= {}", kOracleMaxDimension));
        const SymbolicAnalysis sym = analyze(A, config.max_size);
        const SelInvResult oracle = extract_selected(dense_inverse_oracle(A), sym.fill, sym.layout.partition());
        const ResultDiff d = compare_results(result, oracle);
        out << fmt::format("max relative error vs dense inverse {:.3e}\n", d.relative);
        if (!(d.relative <= kVerifyTolerance)) {
            out << fmt::format("FAILED at {}\n", describe_position(result, d));
            status = kExitVerification;
        }
    }

    if (config.out) {
        const auto dir = prepare_out_dir(*config.out);
        write_selected(result, A.n(), dir / "selected_inverse.mtx");
        if (run) {
            nlohmann::ordered_json j;
            j["schema_version"] = kReportSchemaVersion;
            j["source"] = config.source();
            j["grid"] = {{"rows", grid.pr()}, {"cols", grid.pc()}};
            j["tree"] = to_string(config.tree);
            j["seed"] = config.seed;
            j["payload_bytes"] = run->ledger.total(Direction::Sent, VolumeKind::All);
            j["wire_bytes"] = run->ledger.total_wire_bytes();
            j["messages"] = run->ledger.events().size();
            j["colbcast_sent"] = to_json(volume_stats(run->ledger, Direction::Sent, VolumeKind::ColBcast));
            j["rowreduce_received"] =
                to_json(volume_stats(run->ledger, Direction::Received, VolumeKind::RowReduce));
            write_file(dir / "volume.json", j.dump(2) + "\n");
        }
    }
    return status;
}

int cmd_verify(const RunConfig& config, std::ostream& out)
{
    const SparseMatrix A = load_matrix(config);
    if (A.n() > kOracleMaxDimension)
        throw InputError(fmt::format("verify is limited to n <= {} (got {})", kOracleMaxDimension, A.n()));
    const ProcessGrid grid = config.grid();
    const bool symmetric = A.is_numerically_symmetric();
    if (!symmetric && grid.size() > 1)
        throw InputError("the distributed run needs a symmetric matrix; use --grid 1x1 for general matrices");

    const SymbolicAnalysis sym = analyze(A, config.max_size);
    SupFactorization f = supernodal_lu(A, sym.layout.partition(), sym.fill);
    normalize_in_place(f);
    const SelInvResult sequential = selected_inversion(f);
    const SelInvResult oracle = extract_selected(dense_inverse_oracle(A), sym.fill, sym.layout.partition());

    const ResultDiff seq_diff = compare_results(sequential, oracle);
    out << fmt::format("sequential vs dense inverse: max relative error {:.3e}\n", seq_diff.relative);
    double worst = seq_diff.relative;
    std::string where = describe_position(sequential, seq_diff);

    if (symmetric) {
        const ParallelRun run =
            run_parallel_selinv(prepare_problem(A, config.max_size), grid, runtime_options(config, grid.size()));
        const ResultDiff par_diff = compare_results(run.result, oracle);
        const ResultDiff cross = compare_results(run.result, sequential);
        out << fmt::format("parallel {}x{} ({} tree) vs dense inverse: max relative error {:.3e}\n", grid.pr(),
                           grid.pc(), to_string(config.tree), par_diff.relative);
        out << fmt::format("parallel vs sequential: max relative error {:.3e}\n", cross.relative);
        if (par_diff.relative > worst) {
            worst = par_diff.relative;
            where = describe_position(run.result, par_diff);
        }
    } else {
        out << "parallel run skipped: matrix is not symmetric\n";
    }

    out << fmt::format("max relative error {:.3e}\n", worst);
    if (!(worst <= kVerifyTolerance)) {
        out << fmt::format("FAILED: error above {:.0e} at {}\n", kVerifyTolerance, where);
        return kExitVerification;
    }
    out << "OK\n";
    return kExitOk;
}

int cmd_experiment(const ExperimentConfig& config, std::ostream& out)
{
    if (!config.run.out) throw InputError("experiment needs --out DIR");
    if (config.seeds == 0) throw InputError("--seeds must be at least 1");
    if (config.schemes.empty()) throw InputError("--schemes must name at least one tree");
    const auto dir = prepare_out_dir(*config.run.out);

    const SparseMatrix A = load_matrix(config.run);
    const ProcessGrid grid = config.run.grid();
    const PreparedProblem problem = prepare_problem(A, config.run.max_size);

    std::vector<std::uint64_t> seeds;
    for (std::size_t k = 0; k < config.seeds; ++k) seeds.push_back(config.run.seed + k);
    const SchemeComparison cmp = compare_schemes(problem, config.run.source(), grid, config.schemes, seeds,
                                                 config.run.max_size, runtime_options(config.run, grid.size()));

    static constexpr std::pair<VolumeKind, Direction> kOutputs[] = {
        {VolumeKind::ColBcast, Direction::Sent},
        {VolumeKind::ColBcast, Direction::Received},
        {VolumeKind::RowReduce, Direction::Sent},
        {VolumeKind::RowReduce, Direction::Received},
    };
    for (const auto& s : cmp.schemes) {
        for (auto [kind, direction] : kOutputs) {
            const auto stem = fmt::format("{}_{}_{}", to_string(s.scheme), to_string(kind), to_string(direction));
            heatmap_csv(s.first_ledger, grid, direction, kind, dir / (stem + ".csv"));
            histogram_csv(s.first_ledger, direction, kind, config.bins, dir / (stem + "_hist.csv"));
        }
    }
    write_file(dir / "comparison.json", to_json(cmp).dump(2) + "\n");

    out << fmt::format("matrix {} (n = {}, {} supernodes), grid {}x{}, {} seed(s) from {}\n", cmp.matrix, cmp.n,
                       cmp.supernodes, grid.pr(), grid.pc(), seeds.size(), config.run.seed);
    out << fmt::format("{:<10}{:>18}{:>18}{:>18}{:>18}\n", "scheme", "bcast max MB", "bcast stddev MB",
                       "reduce max MB", "reduce stddev MB");
    for (const auto& s : cmp.schemes) {
        out << fmt::format("{:<10}{:>18.6f}{:>18.6f}{:>18.6f}{:>18.6f}\n", to_string(s.scheme),
                           s.colbcast_sent.mean.max, s.colbcast_sent.mean.stddev, s.rowreduce_received.mean.max,
                           s.rowreduce_received.mean.stddev);
    }
    for (const auto& [name, ok] : cmp.checks) out << fmt::format("check {}: {}\n", name, ok ? "yes" : "no");
    out << fmt::format("max relative error vs sequential {:.3e}\n", cmp.max_relative_error);
    out << fmt::format("wrote {}\n", dir.string());
    return kExitOk;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Selected inversion of sparse matrices on an emulated 2D process grid", "selinv"};
    app.require_subcommand(1);

    RunConfig config;
    ExperimentConfig experiment;
    std::string grid_text = "1x1";
    std::string tree_text = "shifted";
    std::vector<std::string> scheme_names;

    auto add_common = [&](CLI::App* sub) {
        auto* m = sub->add_option("--matrix", config.matrix, "Matrix Market file (coordinate, real/integer/pattern)")
                      ->check(CLI::ExistingFile);
        auto* g = sub->add_option("--gen", config.gen,
                                  "Generated matrix: lap2d:NXxNY, tridiag:N, arrow:N, randdd:N[:SEED], "
                                  "randdd-nonsym:N[:SEED], zero:N");
        m->excludes(g);
        sub->add_option("--perm", config.perm, "Symmetric permutation file, perm[new] = old, 0-based")
            ->check(CLI::ExistingFile);
        sub->add_option("--grid", grid_text, "Process grid PRxPC")->capture_default_str();
        sub->add_option("--tree", tree_text, "Collective tree: flat, binary or shifted")
            ->check(CLI::IsMember({"flat", "binary", "shifted"}))
            ->capture_default_str();
        sub->add_option("--seed", config.seed, "Global seed for tree shifts")->capture_default_str();
        sub->add_option("--max-supernode", config.max_size, "Largest supernode width")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        sub->add_option("--out", config.out, "Output directory");
        sub->add_flag("--verify", config.verify, "Check the result against a dense reference");
    };

    auto* factorize = app.add_subcommand("factorize", "Symbolic analysis and supernodal LU");
    auto* invert = app.add_subcommand("invert", "Selected inversion on the process grid");
    auto* verify = app.add_subcommand("verify", "Compare sequential and parallel results with a dense inverse");
    auto* exp = app.add_subcommand("experiment", "Communication volume comparison of tree schemes");
    for (auto* sub : {factorize, invert, verify, exp}) add_common(sub);
    exp->add_option("--schemes", scheme_names, "Comma-separated tree schemes")
        ->delimiter(',')
        ->check(CLI::IsMember({"flat", "binary", "shifted"}));
    exp->add_option("--seeds", experiment.seeds, "Number of consecutive seeds starting at --seed")
        ->capture_default_str();
    exp->add_option("--bins", experiment.bins, "Histogram bins")->check(CLI::PositiveNumber)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            app.exit(e, out, err);
            return kExitOk;
        }
        err << "error: " << e.what() << "\n";
        err << "run with --help for usage\n";
        return kExitInput;
    }

    try {
        const auto [pr, pc] = parse_grid(grid_text);
        config.pr = pr;
        config.pc = pc;
        config.tree = *parse_tree_kind(tree_text);
        if (factorize->parsed()) return cmd_factorize(config, out);
        if (invert->parsed()) return cmd_invert(config, out);
        if (verify->parsed()) return cmd_verify(config, out);
        experiment.run = config;
        if (!scheme_names.empty()) {
            experiment.schemes.clear();
            for (const auto& s : scheme_names) experiment.schemes.push_back(*parse_tree_kind(s));
        }
        return cmd_experiment(experiment, out);
    } catch (const FactorizationError& e) {
        err << "error: factorization failed at column " << e.column() << ": " << e.what() << "\n";
        return kExitInput;
    } catch (const InputError& e) {
        err << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const VerificationError& e) {
        err << "verification failed: " << e.what() << "\n";
        return kExitVerification;
    } catch (const InvariantError& e) {
        err << "internal error: " << e.what() << "\n";
        return kExitInvariant;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return kExitInvariant;
    }
}

}  // namespace pselinv::cli
