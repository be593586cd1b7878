#include <gtest/gtest.h>

#include "pselinv/errors.hpp"
#include "pselinv/ledger.hpp"

using namespace pselinv;

TEST(CommLedger, CountsBytesAndMessagesPerTag)
{
    CommLedger l(3);
    l.record(0, 1, Tag::ColBcast, 4, 5, 10);
    l.record(0, 2, Tag::ColBcast, 4, 5, 10);
    l.record(2, 1, Tag::RowReduce, 4, 6, 3);
    l.record(1, 0, Tag::LPanel, 2, 4, 1);

    EXPECT_EQ(l.bytes(0, Direction::Sent, Tag::ColBcast), 160u);
    EXPECT_EQ(l.messages(0, Direction::Sent, Tag::ColBcast), 2u);
    EXPECT_EQ(l.bytes(1, Direction::Received, VolumeKind::All), 80u + 24u);
    EXPECT_EQ(l.bytes(1, Direction::Received, VolumeKind::RowReduce), 24u);
    EXPECT_EQ(l.bytes(0, Direction::Received, VolumeKind::Other), 8u);
    EXPECT_EQ(l.per_rank(Direction::Sent, VolumeKind::ColBcast), (std::vector<std::uint64_t>{160, 0, 0}));
    EXPECT_EQ(l.total(Direction::Sent, VolumeKind::All), 160u + 24u + 8u);
    EXPECT_EQ(l.total_wire_bytes(), 192u + 4 * kHeaderBytes);
    ASSERT_EQ(l.events().size(), 4u);
    EXPECT_EQ(l.events()[2].seq, 2u);
    EXPECT_EQ(l.events()[2].block, 6);
}

TEST(CommLedger, SentEqualsReceivedPerTag)
{
    CommLedger l(5);
    for (int k = 0; k < 40; ++k) l.record(k % 5, (3 * k + 1) % 5, static_cast<Tag>(k % kTagCount), k, k / 2, k + 1);
    for (VolumeKind v : {VolumeKind::ColBcast, VolumeKind::RowReduce, VolumeKind::Other, VolumeKind::All})
        EXPECT_EQ(l.total(Direction::Sent, v), l.total(Direction::Received, v));
}

TEST(CommLedger, RejectsRanksOutsideTheGrid)
{
    CommLedger l(2);
    EXPECT_THROW(l.record(0, 2, Tag::UPanel, 0, 0, 1), InvariantError);
    EXPECT_THROW(l.record(-1, 0, Tag::UPanel, 0, 0, 1), InvariantError);
    EXPECT_THROW(CommLedger(0), InputError);
}

TEST(CommLedger, EquivalenceIgnoresEmissionOrder)
{
    CommLedger a(3), b(3), c(3);
    a.record(0, 1, Tag::ColBcast, 1, 2, 4);
    a.record(1, 2, Tag::RowReduce, 1, 2, 4);
    b.record(1, 2, Tag::RowReduce, 1, 2, 4);
    b.record(0, 1, Tag::ColBcast, 1, 2, 4);
    c.record(0, 1, Tag::ColBcast, 1, 2, 4);
    c.record(1, 2, Tag::RowReduce, 1, 3, 4);  // same counters, different block
    EXPECT_TRUE(a.equivalent(b));
    EXPECT_TRUE(b.equivalent(a));
    EXPECT_FALSE(a.equivalent(c));
    EXPECT_FALSE(a.equivalent(CommLedger(4)));
}

TEST(CommLedger, Names)
{
    EXPECT_EQ(to_string(Tag::DiagUpdate), "diagupdate");
    EXPECT_EQ(to_string(VolumeKind::ColBcast), "colbcast");
    EXPECT_EQ(to_string(Direction::Received), "received");
}
