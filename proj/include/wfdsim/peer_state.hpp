#pragma once

#include "wfdsim/frame.hpp"
#include "wfdsim/sim_time.hpp"

#include <array>
#include <cstddef>
#include <string_view>

namespace wfd {

enum class PeerState {
    Idle,
    Scan,
    FindListen,
    FindSearch,
    Negotiating,
    ProvisioningPhase1,
    ProvisioningPhase2,
    GoOperating,
    ClientAssociated,
    Joining,
};

inline constexpr std::size_t kPeerStateCount = 10;

constexpr std::string_view to_string(PeerState s) {
    switch (s) {
    case PeerState::Idle: return "Idle";
    case PeerState::Scan: return "Scan";
    case PeerState::FindListen: return "FindListen";
    case PeerState::FindSearch: return "FindSearch";
    case PeerState::Negotiating: return "Negotiating";
    case PeerState::ProvisioningPhase1: return "ProvisioningPhase1";
    case PeerState::ProvisioningPhase2: return "ProvisioningPhase2";
    case PeerState::GoOperating: return "GoOperating";
    case PeerState::ClientAssociated: return "ClientAssociated";
    case PeerState::Joining: return "Joining";
    }
    return "?";
}

/// Legal state transitions of a Wi-Fi Direct device.
///
/// Beyond the standard formation path this admits: the negotiation winner
/// going straight to GoOperating (it provisions the client while beaconing),
/// the persistent fast path (Scan/Find -> ProvisioningPhase2 for a stored
/// client role, Find -> GoOperating for a stored GO role), error returns to
/// Scan from provisioning and joining, and a client leaving its group.
constexpr bool is_legal_transition(PeerState from, PeerState to) {
    using S = PeerState;
    if (from == to)
        return false;
    if (to == S::FindListen)
        return from != S::Idle;  // any -> FindListen on negotiation failure; Idle must scan first
    switch (from) {
    case S::Idle: return to == S::Scan || to == S::GoOperating;
    case S::Scan: return to == S::FindSearch || to == S::Joining || to == S::ProvisioningPhase2;
    case S::FindListen:
    case S::FindSearch:
        return to == S::FindListen || to == S::FindSearch || to == S::Negotiating || to == S::Joining ||
               to == S::ProvisioningPhase2 || to == S::GoOperating;
    case S::Negotiating: return to == S::ProvisioningPhase1 || to == S::GoOperating;
    case S::ProvisioningPhase1: return to == S::ProvisioningPhase2 || to == S::Scan;
    case S::ProvisioningPhase2: return to == S::GoOperating || to == S::ClientAssociated || to == S::Scan;
    case S::Joining: return to == S::ProvisioningPhase1 || to == S::Scan;
    case S::ClientAssociated: return to == S::Scan;
    case S::GoOperating: return false;
    }
    return false;
}

struct StateChange {
    SimTime time;
    PeerState from;
    PeerState to;
    bool operator==(const StateChange&) const = default;
};

enum class GroupRole { Go, Client };

constexpr std::string_view to_string(GroupRole r) { return r == GroupRole::Go ? "GO" : "Client"; }

/// GO election: the higher intent wins; on equal intents the smaller device
/// address wins. The tie-breaker bit is carried in frames but not consulted,
/// so a 15/15 negotiation still yields exactly one GO.
constexpr GroupRole decide_go_role(int my_intent, int peer_intent, DeviceAddress my_addr,
                                   DeviceAddress peer_addr, bool /*my_tiebreak*/) {
    if (my_intent != peer_intent)
        return my_intent > peer_intent ? GroupRole::Go : GroupRole::Client;
    return my_addr < peer_addr ? GroupRole::Go : GroupRole::Client;
}

} // namespace wfd
