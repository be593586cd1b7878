#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "pselinv/grid.hpp"

namespace pselinv {

/// Message kinds of the six-step protocol plus the two point-to-point
/// handoffs.
enum class Tag : std::uint8_t { LPanel, UPanel, ColBcast, RowReduce, DiagUpdate };
inline constexpr std::size_t kTagCount = 5;

/// Aggregation used by the volume statistics.
enum class VolumeKind { ColBcast, RowReduce, Other, All };
enum class Direction { Sent, Received };

std::string_view to_string(Tag t);
std::string_view to_string(VolumeKind k);
std::string_view to_string(Direction d);

inline constexpr std::uint64_t kBytesPerEntry = 8;
inline constexpr std::uint64_t kHeaderBytes = 32;

struct MessageEvent {
    std::uint64_t seq;  // emission order within the run
    Rank src;
    Rank dst;
    Tag tag;
    Index supernode;
    Index block;
    std::uint64_t payload_bytes;

    std::uint64_t size() const noexcept { return payload_bytes + kHeaderBytes; }
};

/// Per-rank payload byte counters plus the ordered event log. Not
/// thread-safe; the runtime serializes calls to record().
class CommLedger {
public:
    CommLedger() = default;
    explicit CommLedger(int ranks);

    int ranks() const noexcept { return static_cast<int>(sent_.size()); }

    /// Logs one inter-rank message carrying `entries` doubles.
    void record(Rank src, Rank dst, Tag tag, Index supernode, Index block, std::uint64_t entries);

    std::uint64_t bytes(Rank r, Direction d, Tag t) const;
    std::uint64_t bytes(Rank r, Direction d, VolumeKind k) const;
    std::uint64_t messages(Rank r, Direction d, Tag t) const;
    /// Per-rank payload bytes, indexed by rank.
    std::vector<std::uint64_t> per_rank(Direction d, VolumeKind k) const;
    std::uint64_t total(Direction d, VolumeKind k) const;
    /// Payload plus headers over all messages.
    std::uint64_t total_wire_bytes() const;

    std::span<const MessageEvent> events() const noexcept { return events_; }

    /// Same counters and the same multiset of messages (emission order may
    /// differ between schedulers).
    bool equivalent(const CommLedger& other) const;

private:
    using Counters = std::array<std::uint64_t, kTagCount>;
    std::vector<Counters> sent_, received_, sent_msgs_, received_msgs_;
    std::vector<MessageEvent> events_;
};

}  // namespace pselinv
