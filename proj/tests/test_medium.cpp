#include "wfdsim/medium.hpp"

#include <gtest/gtest.h>

#include <map>
#include <set>
#include <vector>

using namespace wfd;

namespace {

DeviceAddress host(int i) { return DeviceAddress::for_host(static_cast<std::uint16_t>(i)); }

Frame unicast(FrameKind kind, int src, int dst, ChannelIndex ch) {
    Frame f;
    f.kind = kind;
    f.src = host(src);
    f.dst = host(dst);
    f.channel = ch;
    if (kind == FrameKind::GoNegRequest || kind == FrameKind::GoNegResponse) {
        f.go_intent = 7;
        f.tiebreak = false;
    }
    return f;
}

Frame broadcast(FrameKind kind, int src, ChannelIndex ch) {
    Frame f;
    f.kind = kind;
    f.src = host(src);
    f.dst = DeviceAddress::broadcast();
    f.channel = ch;
    if (kind == FrameKind::Beacon)
        f.group_ssid = "G";
    return f;
}

struct World {
    explicit World(int hosts, MediumParams p = {}, std::uint64_t seed = 1) : medium(engine, p, Rng(seed)) {
        for (int i = 0; i < hosts; ++i)
            medium.register_device(host(i), 0, [this, i](const Frame& f) { inbox[i].push_back(f); });
        medium.add_observer([this](const Delivery& d) {
            log.push_back({d.time, d.frame, d.receivers});
        });
    }
    struct Seen {
        SimTime time;
        Frame frame;
        std::vector<DeviceAddress> receivers;
    };
    Engine engine;
    Medium medium;
    std::map<int, std::vector<Frame>> inbox;
    std::vector<Seen> log;
};

} // namespace

TEST(Medium, TunedDeviceReceivesBroadcast) {
    World w(2);
    w.medium.tune(host(1), 0);
    w.medium.send(broadcast(FrameKind::ProbeRequest, 0, 0));
    w.engine.run_until(SimTime::from_ms(10));
    ASSERT_EQ(w.inbox[1].size(), 1u);
    EXPECT_EQ(w.inbox[1][0].kind, FrameKind::ProbeRequest);
}

TEST(Medium, OtherChannelReceivesNothing) {
    World w(2);
    w.medium.tune(host(1), 3);
    w.medium.send(broadcast(FrameKind::ProbeRequest, 0, 0));
    w.engine.run_until(SimTime::from_ms(10));
    EXPECT_TRUE(w.inbox[1].empty());
}

TEST(Medium, ChannelRangeIsChecked) {
    World w(2);
    EXPECT_THROW(w.medium.tune(host(1), 11), std::out_of_range);
    EXPECT_THROW(w.medium.tune(host(1), -1), std::out_of_range);
    EXPECT_THROW(w.medium.tune(host(7), 1), std::invalid_argument);
    EXPECT_NO_THROW(w.medium.tune(host(1), 10));
}

TEST(Medium, UnicastIsObservedByEveryoneOnTheChannel) {
    World w(3);
    for (int i = 0; i < 3; ++i)
        w.medium.tune(host(i), 6);
    w.medium.send(unicast(FrameKind::GoNegRequest, 1, 0, 6));
    w.engine.run_until(SimTime::from_ms(10));
    ASSERT_EQ(w.inbox[0].size(), 1u);
    ASSERT_EQ(w.inbox[2].size(), 1u);
    EXPECT_EQ(w.inbox[2][0].dst, host(0));
    // Addressee listed first, then bystanders.
    EXPECT_EQ(w.log[0].receivers, (std::vector<DeviceAddress>{host(0), host(2)}));
}

TEST(Medium, LoneBeaconHasNoDeliveries) {
    World w(1);
    w.medium.send(broadcast(FrameKind::Beacon, 0, 0));
    w.engine.run_until(SimTime::from_ms(10));
    EXPECT_EQ(w.medium.stats().transmissions, 1u);
    EXPECT_EQ(w.medium.stats().deliveries, 0u);
}

TEST(Medium, TotalLossDeliversNothing) {
    MediumParams p;
    p.loss_probability = 1.0;
    World w(2, p);
    std::optional<SendOutcome> outcome;
    Frame auth = unicast(FrameKind::Auth, 0, 1, 0);
    auth.auth_seq = 1;
    auth.auth_total = 1;
    w.medium.send(auth, [&](SendOutcome o) { outcome = o; });
    w.medium.send(broadcast(FrameKind::Beacon, 0, 0));
    w.engine.run_until(SimTime::from_ms(100));
    EXPECT_TRUE(w.inbox[1].empty());
    EXPECT_EQ(w.medium.stats().deliveries, 0u);
    EXPECT_EQ(outcome, SendOutcome::Failed);
}

TEST(Medium, LosslessUnicastIsAckedAfterAirtimeTurnaroundAirtime) {
    World w(2);
    Frame f = unicast(FrameKind::GoNegRequest, 0, 1, 0);
    f.go_intent = 7;
    std::optional<SimTime> acked_at;
    w.medium.send(f, [&](SendOutcome o) {
        EXPECT_EQ(o, SendOutcome::Acked);
        acked_at = w.engine.now();
    });
    w.engine.run_until(SimTime::from_ms(10));
    ASSERT_EQ(w.log.size(), 2u);
    // Sender waits one turnaround before starting; data row at +40+314 us.
    EXPECT_EQ(w.log[0].time, SimTime::from_us(354));
    EXPECT_EQ(w.log[1].frame.kind, FrameKind::Ack);
    EXPECT_EQ(w.log[1].frame.src, host(1));
    EXPECT_EQ(w.log[1].time - w.log[0].time, SimTime::from_us(40 + 314));
    ASSERT_TRUE(acked_at);
    EXPECT_EQ(*acked_at - SimTime::from_us(40), SimTime::from_us(314 + 40 + 314));
}

TEST(Medium, UnreachablePeerFailsAfterAllRetries) {
    World w(2);
    w.medium.tune(host(1), 4);
    std::optional<SimTime> failed_at;
    w.medium.send(unicast(FrameKind::GoNegConfirmation, 0, 1, 0), [&](SendOutcome o) {
        EXPECT_EQ(o, SendOutcome::Failed);
        failed_at = w.engine.now();
    });
    w.engine.run_until(SimTime::from_ms(100));
    const MediumParams p;
    EXPECT_EQ(w.medium.stats().transmissions, static_cast<std::uint64_t>(1 + p.max_retries));
    EXPECT_EQ(w.medium.stats().retransmissions, static_cast<std::uint64_t>(p.max_retries));
    ASSERT_TRUE(failed_at);
    // Each attempt waits airtime + ack_timeout; back-to-back after the first turnaround.
    EXPECT_EQ(*failed_at, SimTime::from_us(40) + (p.frame_airtime + p.ack_timeout) * (1 + p.max_retries));
}

TEST(Medium, LossyOutcomeIsReproducible) {
    auto run = [] {
        MediumParams p;
        p.loss_probability = 0.5;
        World w(2, p, 77);
        std::vector<SendOutcome> out;
        for (int i = 0; i < 30; ++i) {
            Frame f = unicast(FrameKind::Auth, 0, 1, 0);
            f.auth_seq = 1;
            f.auth_total = 1;
            w.medium.send(f, [&](SendOutcome o) { out.push_back(o); });
        }
        w.engine.run_until(SimTime::from_ms(1000));
        return std::pair{out, w.medium.stats().losses};
    };
    const auto a = run();
    const auto b = run();
    EXPECT_EQ(a, b);
    EXPECT_EQ(a.first.size(), 30u);
    EXPECT_GT(a.second, 0u);
}

TEST(Medium, LostAckCausesOneRetryAndDuplicateIsSuppressed) {
    World w(2);
    int acks_dropped = 0;
    w.medium.set_drop_filter([&](const Frame& f, DeviceAddress) {
        return f.kind == FrameKind::Ack && acks_dropped++ == 0;
    });
    Frame f = unicast(FrameKind::Auth, 0, 1, 0);
    f.auth_seq = 1;
    f.auth_total = 1;
    std::optional<SendOutcome> outcome;
    w.medium.send(f, [&](SendOutcome o) { outcome = o; });
    w.engine.run_until(SimTime::from_ms(100));
    EXPECT_EQ(outcome, SendOutcome::Acked);
    EXPECT_EQ(w.medium.stats().retransmissions, 1u);
    EXPECT_EQ(w.medium.stats().duplicates, 1u);
    EXPECT_EQ(w.inbox[1].size(), 1u);
}

TEST(Medium, RetuneDropsQueuedFramesSilently) {
    World w(2);
    int callbacks = 0;
    for (int i = 0; i < 3; ++i)
        w.medium.send(unicast(FrameKind::ProbeResponse, 0, 1, 0), [&](SendOutcome) { ++callbacks; });
    w.medium.tune(host(0), 5);
    w.engine.run_until(SimTime::from_ms(100));
    EXPECT_EQ(callbacks, 0);
    EXPECT_TRUE(w.medium.idle(host(0)));
    EXPECT_EQ(w.medium.stats().transmissions, 0u);
}

TEST(Medium, RejectsStructurallyInvalidFrames) {
    World w(2);
    Frame bad = unicast(FrameKind::Beacon, 0, 1, 0);
    EXPECT_THROW(w.medium.send(bad), std::invalid_argument);
    Frame neg = unicast(FrameKind::GoNegConfirmation, 0, 1, 0);
    neg.go_intent = 3;
    EXPECT_THROW(w.medium.send(neg), std::invalid_argument);
    Frame ack = unicast(FrameKind::Ack, 0, 1, 0);
    EXPECT_THROW(w.medium.send(ack), std::invalid_argument);
    MediumParams p;
    p.loss_probability = 1.5;
    EXPECT_THROW(p.validate(), std::invalid_argument);
}

// Random tunings and traffic: deliveries go exactly to the devices tuned to
// the channel when the transmission started, never to the sender.
TEST(MediumProperty, BroadcastSymmetryAndNoSelfDelivery) {
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        Rng rng(seed);
        const int n = 2 + static_cast<int>(rng.uniform_index(5));
        MediumParams p;
        p.channel_count = 3;
        World w(n, p, seed);
        std::map<std::uint64_t, std::set<DeviceAddress>> expected;  // keyed by mac_seq ^ src
        std::vector<std::pair<Frame, std::set<DeviceAddress>>> starts;
        for (int step = 0; step < 40; ++step) {
            const SimTime at = SimTime::from_us(static_cast<std::int64_t>(step) * 1000);
            w.engine.schedule(at, [&, n] {
                for (int i = 0; i < n; ++i)
                    if (rng.bernoulli(0.3))
                        w.medium.tune(host(i), static_cast<ChannelIndex>(rng.uniform_index(3)));
                const int src = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(n)));
                const ChannelIndex ch = w.medium.channel_of(host(src));
                std::set<DeviceAddress> tuned;
                for (int i = 0; i < n; ++i)
                    if (i != src && w.medium.channel_of(host(i)) == ch)
                        tuned.insert(host(i));
                Frame f = broadcast(FrameKind::ProbeRequest, src, ch);
                f.mac_seq = static_cast<std::uint32_t>(step + 1);
                starts.push_back({f, tuned});
                w.medium.transmit(f, w.engine.now());
            });
        }
        w.engine.run_until(SimTime::from_ms(100));
        ASSERT_EQ(w.log.size(), starts.size());
        for (std::size_t i = 0; i < w.log.size(); ++i) {
            const auto& seen = w.log[i];
            std::set<DeviceAddress> got(seen.receivers.begin(), seen.receivers.end());
            EXPECT_EQ(got, starts[i].second);
            EXPECT_FALSE(got.contains(seen.frame.src));
        }
    }
}

// Lossless unicast traffic: every delivery to the addressee is followed by
// exactly one ACK from it before the sender transmits its next frame.
TEST(MediumProperty, AckPairingUnderLosslessTraffic) {
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        Rng rng(seed);
        const int n = 2 + static_cast<int>(rng.uniform_index(4));
        World w(n, {}, seed);
        for (int k = 0; k < 30; ++k) {
            const int src = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(n)));
            int dst = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(n - 1)));
            if (dst >= src)
                ++dst;
            const SimTime at = SimTime::from_us(static_cast<std::int64_t>(rng.uniform_index(20'000)));
            w.engine.schedule(at, [&w, src, dst] {
                Frame f = unicast(FrameKind::ProbeResponse, src, dst, 0);
                w.medium.send(f);
            });
        }
        w.engine.run_until(SimTime::from_ms(200));
        EXPECT_EQ(w.medium.stats().acked, 30u);
        EXPECT_EQ(w.medium.stats().failed, 0u);
        std::map<DeviceAddress, std::optional<Frame>> outstanding;
        for (const auto& seen : w.log) {
            const Frame& f = seen.frame;
            if (f.kind == FrameKind::Ack) {
                auto& o = outstanding[f.dst];
                ASSERT_TRUE(o.has_value()) << "unsolicited ACK";
                EXPECT_EQ(o->dst, f.src);
                o.reset();
                continue;
            }
            EXPECT_FALSE(outstanding[f.src].has_value()) << "new frame before ACK";
            outstanding[f.src] = f;
        }
        for (const auto& [addr, o] : outstanding)
            EXPECT_FALSE(o.has_value());
    }
}
