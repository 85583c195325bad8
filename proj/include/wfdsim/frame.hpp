#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace wfd {

using ChannelIndex = int;

/// 48-bit MAC-style device address. Ordering is lexicographic over the bytes.
class DeviceAddress {
public:
    constexpr DeviceAddress() = default;
    constexpr explicit DeviceAddress(std::array<std::uint8_t, 6> bytes) : bytes_(bytes) {}

    /// Locally administered address 02:00:00:00:hi:lo for simulated host `index`.
    static constexpr DeviceAddress for_host(std::uint16_t index) {
        return DeviceAddress{{0x02, 0, 0, 0, static_cast<std::uint8_t>(index >> 8),
                              static_cast<std::uint8_t>(index & 0xff)}};
    }
    static constexpr DeviceAddress broadcast() { return DeviceAddress{{0xff, 0xff, 0xff, 0xff, 0xff, 0xff}}; }

    constexpr bool is_broadcast() const { return *this == broadcast(); }
    constexpr std::uint16_t host_index() const {
        return static_cast<std::uint16_t>((bytes_[4] << 8) | bytes_[5]);
    }
    constexpr const std::array<std::uint8_t, 6>& bytes() const { return bytes_; }

    std::string to_string() const {
        char buf[18];
        std::snprintf(buf, sizeof buf, "%02x:%02x:%02x:%02x:%02x:%02x", bytes_[0], bytes_[1], bytes_[2],
                      bytes_[3], bytes_[4], bytes_[5]);
        return buf;
    }

    constexpr auto operator<=>(const DeviceAddress&) const = default;

private:
    std::array<std::uint8_t, 6> bytes_{};
};

inline std::string host_name(DeviceAddress a) {
    if (a.is_broadcast())
        return "*";
    return "host[" + std::to_string(a.host_index()) + "]";
}

enum class FrameKind {
    Beacon,
    ProbeRequest,
    ProbeResponse,
    GoNegRequest,
    GoNegResponse,
    GoNegConfirmation,
    ProvisionDiscoveryRequest,
    ProvisionDiscoveryResponse,
    Auth,
    Data,
    Ack,
};

constexpr bool is_broadcast_kind(FrameKind k) { return k == FrameKind::Beacon || k == FrameKind::ProbeRequest; }
constexpr bool is_go_negotiation(FrameKind k) {
    return k == FrameKind::GoNegRequest || k == FrameKind::GoNegResponse || k == FrameKind::GoNegConfirmation;
}

/// Simulated 802.11 / P2P frame.
struct Frame {
    FrameKind kind = FrameKind::Data;
    DeviceAddress src;
    DeviceAddress dst;
    ChannelIndex channel = 0;

    std::optional<std::string> group_ssid;
    bool group_owner = false;  // P2P group capability: sender is an operating GO
    bool persistent_flag = false;

    std::optional<int> go_intent;  // GoNegRequest / GoNegResponse only
    std::optional<bool> tiebreak;

    std::optional<int> auth_seq;  // Auth only, 1..auth_total
    std::optional<int> auth_total;

    std::optional<std::string> payload_tag;  // Data: "ping9", "ping9-reply"
    std::optional<DeviceAddress> origin;     // Data: end-to-end source
    std::optional<DeviceAddress> final_dst;  // Data: end-to-end destination

    // Filled by the medium.
    std::uint32_t mac_seq = 0;
    bool retry = false;

    bool is_unicast() const { return !dst.is_broadcast(); }
};

/// Name used in trace rows; copies the vocabulary of the reference traces.
inline std::string trace_name(const Frame& f) {
    switch (f.kind) {
    case FrameKind::Beacon: return "Beacon";
    case FrameKind::ProbeRequest: return "Probe Request";
    case FrameKind::ProbeResponse: return "Probe Response";
    case FrameKind::GoNegRequest: return "GO Negotiation Request Frame";
    case FrameKind::GoNegResponse: return "GO Negotiation Response Frame";
    case FrameKind::GoNegConfirmation: return "GO Negotiation Confirmation Frame";
    case FrameKind::ProvisionDiscoveryRequest: return "Provision Request";
    case FrameKind::ProvisionDiscoveryResponse: return "Provision discovery Response";
    case FrameKind::Auth: return "Authentication";
    case FrameKind::Ack: return "ACK";
    case FrameKind::Data: return f.payload_tag.value_or("data");
    }
    return "?";
}

/// Checks the structural invariants of a frame; throws std::invalid_argument.
inline void validate_frame(const Frame& f) {
    if (f.src.is_broadcast())
        throw std::invalid_argument("frame source is the broadcast address");
    if (is_broadcast_kind(f.kind) != f.dst.is_broadcast())
        throw std::invalid_argument(trace_name(f) + ": broadcast kinds must be broadcast, others unicast");
    const bool neg = f.kind == FrameKind::GoNegRequest || f.kind == FrameKind::GoNegResponse;
    if (neg != f.go_intent.has_value())
        throw std::invalid_argument(trace_name(f) + ": go_intent present iff request/response");
    if (f.go_intent && (*f.go_intent < 0 || *f.go_intent > 15))
        throw std::invalid_argument("go_intent outside 0..15");
    if (f.kind == FrameKind::Auth) {
        if (!f.auth_seq || !f.auth_total || *f.auth_seq < 1 || *f.auth_seq > *f.auth_total)
            throw std::invalid_argument("Authentication frame needs 1 <= auth_seq <= auth_total");
    }
    if (f.kind == FrameKind::Data && (!f.payload_tag || !f.origin || !f.final_dst))
        throw std::invalid_argument("data frame needs payload_tag, origin and final_dst");
}

} // namespace wfd
