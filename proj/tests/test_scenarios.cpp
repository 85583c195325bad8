#include "test_util.hpp"

#include <gtest/gtest.h>

#include <algorithm>

using namespace wfd;
using wfdtest::frames_of;
using wfdtest::host;

namespace {

std::pair<std::string, std::string> outputs(const ScenarioConfig& c) {
    Scenario s(c);
    s.run();
    return {s.trace_text(), s.metrics().to_flat() + s.metrics().to_json().dump(2)};
}

// True when the addressee ACKs `it` before the sender queues another frame.
bool acked(const std::vector<FrameRecord>& fr, std::vector<FrameRecord>::const_iterator it) {
    for (auto k = it + 1; k != fr.end(); ++k) {
        if (k->frame.kind == FrameKind::Ack && k->frame.src == it->frame.dst && k->frame.dst == it->frame.src)
            return true;
        if (k->frame.src == it->frame.src && k->frame.kind != FrameKind::Ack)
            return false;
    }
    return false;
}

} // namespace

TEST(ScenarioOne, OneGoAndContiguousHandshakeFollowedByBeacon) {
    Scenario s(wfdtest::load_scenario("scenario1_standard.ini"));
    s.run();
    int gos = 0;
    for (std::size_t i = 0; i < s.host_count(); ++i)
        gos += s.peer(i).role() == GroupRole::Go;
    EXPECT_EQ(gos, 1);
    for (std::size_t i = 0; i < s.host_count(); ++i)
        EXPECT_TRUE(s.peer(i).in_group()) << i;

    const auto& t = s.trace();
    static const std::vector<std::string> pattern{
        "GO Negotiation Request Frame", "ACK", "GO Negotiation Response Frame", "ACK",
        "GO Negotiation Confirmation Frame", "ACK", "Beacon"};
    // Collapse duplicated rows of one transmission, then look for the pattern.
    std::vector<const TraceRecord*> tx;
    for (const auto& r : t)
        if (tx.empty() || tx.back()->event_id != r.event_id || tx.back()->src != r.src)
            tx.push_back(&r);
    bool found = false;
    for (std::size_t i = 0; i + pattern.size() <= tx.size() && !found; ++i) {
        bool match = true;
        for (std::size_t k = 0; k < pattern.size() && match; ++k)
            match = tx[i + k]->frame_name == pattern[k];
        if (!match)
            continue;
        const std::string a = tx[i]->src, b = tx[i]->dst;
        EXPECT_EQ(tx[i + 1]->src, b);
        EXPECT_EQ(tx[i + 2]->src, b);
        EXPECT_EQ(tx[i + 3]->src, a);
        EXPECT_EQ(tx[i + 4]->src, a);
        EXPECT_EQ(tx[i + 5]->src, b);
        const DeviceAddress go = *s.peer(0).group_owner();
        EXPECT_EQ(tx[i + 6]->src, host_name(go));
        found = true;
    }
    EXPECT_TRUE(found);
}

TEST(ScenarioOne, GoldenSeedFacts) {
    Scenario s(wfdtest::load_scenario("scenario1_standard.ini"));
    s.run();
    EXPECT_EQ(s.peer(1).role(), GroupRole::Go);
    const auto m = s.metrics();
    ASSERT_EQ(m.pings.size(), 2u);
    EXPECT_EQ(m.pings[0].sent, m.pings[0].replies);
    EXPECT_EQ(m.pings[1].sent, m.pings[1].replies);
    // "ping9" crosses the GO about 9.55 s into the run.
    auto relay = std::ranges::find_if(s.frames(), [](const FrameRecord& r) {
        return r.frame.payload_tag == "ping9" && r.frame.src == host(1) && r.frame.dst == host(2);
    });
    ASSERT_NE(relay, s.frames().end());
    EXPECT_GT(relay->time, SimTime::from_ms(9500));
    EXPECT_LT(relay->time, SimTime::from_ms(9600));
}

TEST(AutonomousJoin, FirstFrameOfGoIsBeaconAndEachJoinIsPaired) {
    Scenario s(wfdtest::load_scenario("autonomous_join.ini"));
    s.run();
    const auto& fr = s.frames();
    auto first = std::ranges::find_if(fr, [](const FrameRecord& r) { return r.frame.src == host(0); });
    ASSERT_NE(first, fr.end());
    EXPECT_EQ(first->frame.kind, FrameKind::Beacon);
    EXPECT_EQ(first->frame.group_ssid, "Groupe Wifi Direct");
    for (int j : {1, 2}) {
        auto req = std::ranges::find_if(fr, [&](const FrameRecord& r) {
            return r.frame.kind == FrameKind::ProvisionDiscoveryRequest && r.frame.src == host(j);
        });
        auto resp = std::ranges::find_if(fr, [&](const FrameRecord& r) {
            return r.frame.kind == FrameKind::ProvisionDiscoveryResponse && r.frame.dst == host(j);
        });
        ASSERT_NE(req, fr.end());
        ASSERT_NE(resp, fr.end());
        EXPECT_LT(req, resp);
        // Joiners run concurrently, so the ACK need not be the adjacent row.
        EXPECT_TRUE(acked(fr, req)) << j;
        EXPECT_TRUE(acked(fr, resp)) << j;
    }
}

TEST(AutonomousJoin, ReferenceTimingOfFirstBeacon) {
    Scenario s(wfdtest::load_scenario("join_timing.ini"));
    s.run();
    auto first = std::ranges::find_if(s.trace(), [](const TraceRecord& r) { return r.src == "host[0]"; });
    ASSERT_NE(first, s.trace().end());
    EXPECT_EQ(first->frame_name, "Beacon");
    EXPECT_EQ(first->time.to_string(), "5.084426574409");
    EXPECT_EQ(s.peer(0).channel(), 5);
    EXPECT_EQ(s.peer(0).group()->members.size(), 3u);
}

TEST(Determinism, ShippedScenariosAreByteIdentical) {
    for (const char* name : {"scenario1_standard.ini", "autonomous_join.ini", "join_timing.ini",
                             "persistent_restart.ini"}) {
        const ScenarioConfig c = wfdtest::load_scenario(name);
        EXPECT_EQ(outputs(c), outputs(c)) << name;
    }
}

TEST(Determinism, RandomSeedsAreByteIdenticalAndSeedsMatter) {
    Rng pick(2024);
    std::set<std::string> distinct;
    for (int k = 0; k < 10; ++k) {
        ScenarioConfig c = wfdtest::load_scenario("scenario1_standard.ini");
        c.seed = pick.next_u64();
        const auto a = outputs(c);
        EXPECT_EQ(a, outputs(c)) << c.seed;
        distinct.insert(a.first);
    }
    EXPECT_GT(distinct.size(), 1u);
}

TEST(Determinism, LossyRunsAreReproducible) {
    ScenarioConfig c = wfdtest::load_scenario("scenario1_standard.ini");
    c.medium.loss_probability = 0.1;
    EXPECT_EQ(outputs(c), outputs(c));
}
