#include "pselinv/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <fmt/format.h>

#include "pselinv/errors.hpp"
#include "pselinv/selinv.hpp"

namespace pselinv {

namespace {

void write_text(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError(fmt::format("cannot open '{}' for writing", path.string()));
    out << text;
    out.flush();
    if (!out) throw InputError(fmt::format("failed writing '{}'", path.string()));
}

double population_stddev(std::span<const double> xs)
{
    if (xs.empty()) return 0.0;
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    double acc = 0.0;
    for (double x : xs) acc += (x - mean) * (x - mean);
    return std::sqrt(acc / static_cast<double>(xs.size()));
}

StatsAggregate aggregate(const std::vector<VolumeStats>& per_seed)
{
    StatsAggregate out;
    out.mean.direction = out.stddev.direction = per_seed.front().direction;
    out.mean.kind = out.stddev.kind = per_seed.front().kind;
    auto fold = [&](double VolumeStats::*field) {
        std::vector<double> xs;
        for (const auto& s : per_seed) xs.push_back(s.*field);
        out.mean.*field = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
        out.stddev.*field = population_stddev(xs);
    };
    fold(&VolumeStats::min);
    fold(&VolumeStats::max);
    fold(&VolumeStats::median);
    fold(&VolumeStats::stddev);
    fold(&VolumeStats::mean);
    return out;
}

}  // namespace

VolumeStats stats_from_volumes(std::span<const std::uint64_t> bytes, Direction d, VolumeKind k)
{
    if (bytes.empty()) throw InputError("volume statistics need at least one rank");
    std::vector<double> mb;
    mb.reserve(bytes.size());
    for (auto b : bytes) mb.push_back(static_cast<double>(b) / kBytesPerMB);

    VolumeStats s;
    s.direction = d;
    s.kind = k;
    s.mean = std::accumulate(mb.begin(), mb.end(), 0.0) / static_cast<double>(mb.size());
    s.stddev = population_stddev(mb);
    std::sort(mb.begin(), mb.end());
    s.min = mb.front();
    s.max = mb.back();
    const std::size_t mid = mb.size() / 2;
    s.median = mb.size() % 2 ? mb[mid] : 0.5 * (mb[mid - 1] + mb[mid]);
    return s;
}

VolumeStats volume_stats(const CommLedger& ledger, Direction d, VolumeKind k)
{
    if (ledger.ranks() == 0) throw InputError("empty ledger");
    const auto v = ledger.per_rank(d, k);
    return stats_from_volumes(v, d, k);
}

std::string heatmap_csv_text(const CommLedger& ledger, const ProcessGrid& grid, Direction d,
                             VolumeKind k)
{
    if (ledger.ranks() != grid.size())
        throw InputError(fmt::format("ledger covers {} ranks but the grid has {}", ledger.ranks(), grid.size()));
    const auto v = ledger.per_rank(d, k);
    std::string out = "grid_row,grid_col,bytes\n";
    for (Rank r = 0; r < grid.size(); ++r)
        out += fmt::format("{},{},{}\n", grid.row_of(r), grid.col_of(r), v[static_cast<std::size_t>(r)]);
    return out;
}

void heatmap_csv(const CommLedger& ledger, const ProcessGrid& grid, Direction d, VolumeKind k,
                 const std::filesystem::path& path)
{
    write_text(path, heatmap_csv_text(ledger, grid, d, k));
}

std::vector<HistogramBin> histogram(std::span<const std::uint64_t> bytes, std::size_t bins)
{
    if (bins == 0) throw InputError("histogram needs at least one bin");
    const std::uint64_t top = bytes.empty() ? 0 : *std::max_element(bytes.begin(), bytes.end());
    std::vector<HistogramBin> out(bins);
    for (std::size_t b = 0; b < bins; ++b) {
        out[b].lower = static_cast<double>(top) * static_cast<double>(b) / static_cast<double>(bins);
        out[b].upper = static_cast<double>(top) * static_cast<double>(b + 1) / static_cast<double>(bins);
        out[b].ranks = 0;
    }
    for (auto v : bytes) {
        std::size_t b = 0;
        if (top > 0) {
            const auto scaled = static_cast<unsigned __int128>(v) * bins / top;
            b = std::min<std::size_t>(static_cast<std::size_t>(scaled), bins - 1);
        }
        ++out[b].ranks;
    }
    return out;
}

std::string histogram_csv_text(const CommLedger& ledger, Direction d, VolumeKind k, std::size_t bins)
{
    const auto v = ledger.per_rank(d, k);
    std::string out = "bin_lower,bin_upper,rank_count\n";
    for (const auto& bin : histogram(v, bins)) out += fmt::format("{},{},{}\n", bin.lower, bin.upper, bin.ranks);
    return out;
}

void histogram_csv(const CommLedger& ledger, Direction d, VolumeKind k, std::size_t bins,
                   const std::filesystem::path& path)
{
    write_text(path, histogram_csv_text(ledger, d, k, bins));
}

const SchemeReport* SchemeComparison::find(TreeKind k) const
{
    for (const auto& s : schemes)
        if (s.scheme == k) return &s;
    return nullptr;
}

SchemeComparison compare_schemes(const PreparedProblem& problem, const std::string& matrix,
                                 const ProcessGrid& grid, std::span<const TreeKind> schemes,
                                 std::span<const std::uint64_t> seeds, Index max_size,
                                 const RuntimeOptions& base)
{
    if (seeds.empty()) throw InputError("scheme comparison needs at least one seed");
    if (schemes.empty()) throw InputError("scheme comparison needs at least one scheme");

    SchemeComparison cmp;
    cmp.matrix = matrix;
    cmp.n = problem.n;
    cmp.supernodes = problem.factor->count();
    cmp.max_size = max_size;
    cmp.grid = grid;
    cmp.seeds.assign(seeds.begin(), seeds.end());

    const SelInvResult reference = selected_inversion(*problem.factor, Symmetry::Symmetric);
    std::vector<const SelInvResult*> first_result(seeds.size(), nullptr);
    std::vector<SelInvResult> kept;
    kept.reserve(seeds.size());

    for (TreeKind kind : schemes) {
        SchemeReport report{kind, {}, {}, {}, CommLedger(grid.size())};
        std::vector<VolumeStats> bcast, reduce;
        for (std::size_t s = 0; s < seeds.size(); ++s) {
            RuntimeOptions opt = base;
            opt.tree = kind;
            opt.seed = seeds[s];
            ParallelRun run = run_parallel_selinv(problem, grid, opt);

            const ResultDiff diff = compare_results(run.result, reference);
            cmp.max_relative_error = std::max(cmp.max_relative_error, diff.relative);
            if (!(diff.relative <= kEquivalenceTolerance))
                throw VerificationError(fmt::format(
                    "{} tree, seed {}: relative error {:.3e} at ({}, {}) exceeds {:.0e}", to_string(kind),
                    seeds[s], diff.relative, diff.row, diff.col, kEquivalenceTolerance));
            if (first_result[s] == nullptr) {
                kept.push_back(std::move(run.result));
                first_result[s] = &kept.back();
            } else if (!run.result.bitwise_equal(*first_result[s])) {
                throw VerificationError(fmt::format("{} tree, seed {}: result differs from {} tree",
                                                    to_string(kind), seeds[s], to_string(schemes.front())));
            }

            SchemeRun r{seeds[s], volume_stats(run.ledger, Direction::Sent, VolumeKind::ColBcast),
                        volume_stats(run.ledger, Direction::Received, VolumeKind::RowReduce)};
            bcast.push_back(r.colbcast_sent);
            reduce.push_back(r.rowreduce_received);
            report.runs.push_back(r);
            if (s == 0) report.first_ledger = std::move(run.ledger);
        }
        report.colbcast_sent = aggregate(bcast);
        report.rowreduce_received = aggregate(reduce);
        cmp.schemes.push_back(std::move(report));
    }

    const auto* flat = cmp.find(TreeKind::Flat);
    const auto* binary = cmp.find(TreeKind::Binary);
    const auto* shifted = cmp.find(TreeKind::ShiftedBinary);
    if (shifted && binary)
        cmp.checks["shifted_stddev_below_binary"] =
            shifted->colbcast_sent.mean.stddev < binary->colbcast_sent.mean.stddev;
    if (shifted && flat) {
        cmp.checks["shifted_stddev_below_flat"] =
            shifted->colbcast_sent.mean.stddev < flat->colbcast_sent.mean.stddev;
        cmp.checks["shifted_max_below_flat"] = shifted->colbcast_sent.mean.max < flat->colbcast_sent.mean.max;
    }
    if (binary && flat)
        cmp.checks["binary_stddev_below_flat"] =
            binary->colbcast_sent.mean.stddev < flat->colbcast_sent.mean.stddev;
    return cmp;
}

nlohmann::ordered_json to_json(const VolumeStats& s)
{
    nlohmann::ordered_json j;
    j["kind"] = to_string(s.kind);
    j["direction"] = to_string(s.direction);
    j["min_mb"] = s.min;
    j["max_mb"] = s.max;
    j["median_mb"] = s.median;
    j["stddev_mb"] = s.stddev;
    j["mean_mb"] = s.mean;
    return j;
}

nlohmann::ordered_json to_json(const SchemeComparison& c)
{
    nlohmann::ordered_json j;
    j["schema_version"] = kReportSchemaVersion;
    j["matrix"] = {{"source", c.matrix}, {"n", c.n}, {"supernodes", c.supernodes}, {"max_supernode", c.max_size}};
    j["grid"] = {{"rows", c.grid.pr()}, {"cols", c.grid.pc()}, {"ranks", c.grid.size()}};
    j["seeds"] = c.seeds;
    j["max_relative_error"] = c.max_relative_error;

    auto schemes = nlohmann::ordered_json::array();
    for (const auto& s : c.schemes) {
        nlohmann::ordered_json e;
        e["scheme"] = to_string(s.scheme);
        auto runs = nlohmann::ordered_json::array();
        for (const auto& r : s.runs) {
            runs.push_back({{"seed", r.seed},
                            {"colbcast_sent", to_json(r.colbcast_sent)},
                            {"rowreduce_received", to_json(r.rowreduce_received)}});
        }
        e["runs"] = std::move(runs);
        e["aggregate"] = {
            {"colbcast_sent", {{"mean", to_json(s.colbcast_sent.mean)}, {"stddev", to_json(s.colbcast_sent.stddev)}}},
            {"rowreduce_received",
             {{"mean", to_json(s.rowreduce_received.mean)}, {"stddev", to_json(s.rowreduce_received.stddev)}}},
        };
        schemes.push_back(std::move(e));
    }
    j["schemes"] = std::move(schemes);
    j["checks"] = c.checks;
    return j;
}

}  // namespace pselinv
