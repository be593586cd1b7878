#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "pselinv/comm_tree.hpp"
#include "pselinv/ledger.hpp"
#include "pselinv/runtime.hpp"

namespace pselinv {

inline constexpr double kBytesPerMB = 1e6;
inline constexpr int kReportSchemaVersion = 1;

/// Order statistics of per-rank payload volume, in MB (10^6 bytes).
/// stddev is the population standard deviation over all ranks.
struct VolumeStats {
    double min = 0.0;
    double max = 0.0;
    double median = 0.0;
    double stddev = 0.0;
    double mean = 0.0;
    Direction direction = Direction::Sent;
    VolumeKind kind = VolumeKind::All;
};

/// Throws InputError on an empty volume list.
VolumeStats stats_from_volumes(std::span<const std::uint64_t> bytes, Direction d, VolumeKind k);

/// Throws InputError when the ledger covers no ranks.
VolumeStats volume_stats(const CommLedger& ledger, Direction d, VolumeKind k);

/// `grid_row,grid_col,bytes`, one row per rank in rank order.
std::string heatmap_csv_text(const CommLedger& ledger, const ProcessGrid& grid, Direction d,
                             VolumeKind k);
void heatmap_csv(const CommLedger& ledger, const ProcessGrid& grid, Direction d, VolumeKind k,
                 const std::filesystem::path& path);

struct HistogramBin {
    double lower;
    double upper;
    std::size_t ranks;
};

/// Equal-width bins over [0, max]; the last bin is closed. With an all-zero
/// volume every rank lands in the first bin.
std::vector<HistogramBin> histogram(std::span<const std::uint64_t> bytes, std::size_t bins);

/// `bin_lower,bin_upper,rank_count` with bounds in bytes.
std::string histogram_csv_text(const CommLedger& ledger, Direction d, VolumeKind k, std::size_t bins);
void histogram_csv(const CommLedger& ledger, Direction d, VolumeKind k, std::size_t bins,
                   const std::filesystem::path& path);

/// Mean and spread of one statistic across seeds.
struct StatsAggregate {
    VolumeStats mean;
    VolumeStats stddev;
};

struct SchemeRun {
    std::uint64_t seed;
    VolumeStats colbcast_sent;
    VolumeStats rowreduce_received;
};

struct SchemeReport {
    TreeKind scheme;
    std::vector<SchemeRun> runs;
    StatsAggregate colbcast_sent;
    StatsAggregate rowreduce_received;
    CommLedger first_ledger;  // ledger of the first seed, for heat maps
};

struct SchemeComparison {
    std::string matrix;  // descriptor, e.g. "lap2d:24x24"
    Index n = 0;
    Index supernodes = 0;
    Index max_size = 0;
    ProcessGrid grid{1, 1};
    std::vector<std::uint64_t> seeds;
    std::vector<SchemeReport> schemes;
    double max_relative_error = 0.0;  // worst run against the sequential result
    std::map<std::string, bool> checks;

    const SchemeReport* find(TreeKind k) const;
};

/// Relative tolerance of every parallel run against the sequential result.
inline constexpr double kEquivalenceTolerance = 1e-11;

/// Runs each scheme for each seed on the same prepared problem. Throws
/// VerificationError when a run deviates from the sequential result or
/// when two schemes disagree bitwise.
SchemeComparison compare_schemes(const PreparedProblem& problem, const std::string& matrix,
                                 const ProcessGrid& grid, std::span<const TreeKind> schemes,
                                 std::span<const std::uint64_t> seeds, Index max_size,
                                 const RuntimeOptions& base = {});

nlohmann::ordered_json to_json(const VolumeStats& s);
nlohmann::ordered_json to_json(const SchemeComparison& c);

}  // namespace pselinv
