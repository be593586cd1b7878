#include "pselinv/ledger.hpp"

#include <algorithm>
#include <tuple>

#include <fmt/format.h>

#include "pselinv/errors.hpp"

namespace pselinv {

std::string_view to_string(Tag t)
{
    switch (t) {
    case Tag::LPanel: return "lpanel";
    case Tag::UPanel: return "upanel";
    case Tag::ColBcast: return "colbcast";
    case Tag::RowReduce: return "rowreduce";
    case Tag::DiagUpdate: return "diagupdate";
    }
    return "unknown";
}

std::string_view to_string(VolumeKind k)
{
    switch (k) {
    case VolumeKind::ColBcast: return "colbcast";
    case VolumeKind::RowReduce: return "rowreduce";
    case VolumeKind::Other: return "other";
    case VolumeKind::All: return "all";
    }
    return "unknown";
}

std::string_view to_string(Direction d) { return d == Direction::Sent ? "sent" : "received"; }

namespace {

bool in_kind(Tag t, VolumeKind k)
{
    switch (k) {
    case VolumeKind::ColBcast: return t == Tag::ColBcast;
    case VolumeKind::RowReduce: return t == Tag::RowReduce;
    case VolumeKind::Other: return t != Tag::ColBcast && t != Tag::RowReduce;
    case VolumeKind::All: return true;
    }
    return false;
}

}  // namespace

CommLedger::CommLedger(int ranks)
{
    if (ranks < 1) throw InputError("ledger needs at least one rank");
    sent_.assign(ranks, Counters{});
    received_.assign(ranks, Counters{});
    sent_msgs_.assign(ranks, Counters{});
    received_msgs_.assign(ranks, Counters{});
}

void CommLedger::record(Rank src, Rank dst, Tag tag, Index supernode, Index block, std::uint64_t entries)
{
    if (src < 0 || dst < 0 || src >= ranks() || dst >= ranks())
        throw InvariantError(fmt::format("message {} -> {} outside a {}-rank ledger", src, dst, ranks()));
    const std::uint64_t bytes = entries * kBytesPerEntry;
    const auto t = static_cast<std::size_t>(tag);
    sent_[src][t] += bytes;
    received_[dst][t] += bytes;
    ++sent_msgs_[src][t];
    ++received_msgs_[dst][t];
    events_.push_back({events_.size(), src, dst, tag, supernode, block, bytes});
}

std::uint64_t CommLedger::bytes(Rank r, Direction d, Tag t) const
{
    return (d == Direction::Sent ? sent_ : received_).at(r)[static_cast<std::size_t>(t)];
}

std::uint64_t CommLedger::bytes(Rank r, Direction d, VolumeKind k) const
{
    std::uint64_t total = 0;
    for (std::size_t t = 0; t < kTagCount; ++t)
        if (in_kind(static_cast<Tag>(t), k)) total += bytes(r, d, static_cast<Tag>(t));
    return total;
}

std::uint64_t CommLedger::messages(Rank r, Direction d, Tag t) const
{
    return (d == Direction::Sent ? sent_msgs_ : received_msgs_).at(r)[static_cast<std::size_t>(t)];
}

std::vector<std::uint64_t> CommLedger::per_rank(Direction d, VolumeKind k) const
{
    std::vector<std::uint64_t> out(ranks());
    for (Rank r = 0; r < ranks(); ++r) out[r] = bytes(r, d, k);
    return out;
}

std::uint64_t CommLedger::total(Direction d, VolumeKind k) const
{
    std::uint64_t sum = 0;
    for (Rank r = 0; r < ranks(); ++r) sum += bytes(r, d, k);
    return sum;
}

std::uint64_t CommLedger::total_wire_bytes() const
{
    std::uint64_t sum = 0;
    for (const auto& e : events_) sum += e.size();
    return sum;
}

bool CommLedger::equivalent(const CommLedger& other) const
{
    if (sent_ != other.sent_ || received_ != other.received_ || sent_msgs_ != other.sent_msgs_ ||
        received_msgs_ != other.received_msgs_ || events_.size() != other.events_.size())
        return false;
    auto key = [](const MessageEvent& e) {
        return std::tuple(e.tag, e.supernode, e.block, e.src, e.dst, e.payload_bytes);
    };
    std::vector<decltype(key(events_[0]))> a, b;
    for (const auto& e : events_) a.push_back(key(e));
    for (const auto& e : other.events_) b.push_back(key(e));
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    return a == b;
}

}  // namespace pselinv
