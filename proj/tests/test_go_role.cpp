#include "wfdsim/peer_state.hpp"

#include <gtest/gtest.h>

#include <tuple>

using namespace wfd;

namespace {

// Independent oracle: rank each side by (intent, inverted address bytes) and
// pick the maximum.
bool oracle_is_go(int mine, int theirs, DeviceAddress me, DeviceAddress them) {
    auto key = [](int intent, DeviceAddress a) {
        std::uint64_t inv = 0;
        for (std::uint8_t b : a.bytes())
            inv = (inv << 8) | static_cast<std::uint8_t>(0xff - b);
        return std::tuple{intent, inv};
    };
    return key(mine, me) > key(theirs, them);
}

} // namespace

TEST(GoRole, HigherIntentWins) {
    const auto a = DeviceAddress::for_host(0), b = DeviceAddress::for_host(1);
    EXPECT_EQ(decide_go_role(7, 3, b, a, false), GroupRole::Go);
    EXPECT_EQ(decide_go_role(3, 7, a, b, true), GroupRole::Client);
}

TEST(GoRole, TieGoesToSmallerAddress) {
    const auto a = DeviceAddress::for_host(0), b = DeviceAddress::for_host(1);
    EXPECT_EQ(decide_go_role(15, 15, a, b, false), GroupRole::Go);
    EXPECT_EQ(decide_go_role(15, 15, b, a, true), GroupRole::Client);
}

TEST(GoRole, ExhaustiveOracleAllPairsBothAddressOrders) {
    int cases = 0;
    for (auto [lo, hi] : {std::pair{0, 1}, std::pair{1, 0}}) {
        const auto me = DeviceAddress::for_host(static_cast<std::uint16_t>(lo));
        const auto them = DeviceAddress::for_host(static_cast<std::uint16_t>(hi));
        for (int mine = 0; mine < 16; ++mine) {
            for (int theirs = 0; theirs < 16; ++theirs) {
                ++cases;
                const GroupRole r1 = decide_go_role(mine, theirs, me, them, false);
                const GroupRole r2 = decide_go_role(theirs, mine, them, me, true);
                EXPECT_NE(r1, r2) << mine << "/" << theirs;
                EXPECT_EQ(r1 == GroupRole::Go, oracle_is_go(mine, theirs, me, them)) << mine << "/" << theirs;
                // The tie-breaker bit is carried but never consulted.
                EXPECT_EQ(r1, decide_go_role(mine, theirs, me, them, true));
            }
        }
    }
    EXPECT_EQ(cases, 512);
}

TEST(PeerStateTable, StandardFormationPathIsLegal) {
    using S = PeerState;
    const S path[] = {S::Idle, S::Scan, S::FindSearch, S::FindListen, S::Negotiating,
                      S::ProvisioningPhase1, S::ProvisioningPhase2, S::ClientAssociated};
    for (std::size_t i = 1; i < std::size(path); ++i)
        EXPECT_TRUE(is_legal_transition(path[i - 1], path[i])) << to_string(path[i - 1]) << "->" << to_string(path[i]);
    EXPECT_TRUE(is_legal_transition(S::Negotiating, S::GoOperating));
    EXPECT_TRUE(is_legal_transition(S::Idle, S::GoOperating));
    EXPECT_TRUE(is_legal_transition(S::Scan, S::Joining));
}

TEST(PeerStateTable, IllegalJumpsAreRejected) {
    using S = PeerState;
    EXPECT_FALSE(is_legal_transition(S::Idle, S::ClientAssociated));
    EXPECT_FALSE(is_legal_transition(S::Idle, S::FindListen));
    EXPECT_FALSE(is_legal_transition(S::GoOperating, S::Negotiating));
    EXPECT_FALSE(is_legal_transition(S::Scan, S::ClientAssociated));
    EXPECT_FALSE(is_legal_transition(S::Negotiating, S::ClientAssociated));
    for (std::size_t i = 0; i < kPeerStateCount; ++i)
        EXPECT_FALSE(is_legal_transition(static_cast<S>(i), static_cast<S>(i)));
}
