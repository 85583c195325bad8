#pragma once

#include "wfdsim/engine.hpp"
#include "wfdsim/frame.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace wfd {

/// What the data plane needs to know about the device's group membership.
class GroupLink {
public:
    virtual ~GroupLink() = default;
    virtual DeviceAddress address() const = 0;
    virtual bool in_group() const = 0;
    virtual bool is_group_owner() const = 0;
    virtual std::optional<DeviceAddress> group_owner() const = 0;
    virtual bool has_member(DeviceAddress member) const = 0;
    /// Fills in src and channel, then hands the frame to the MAC queue.
    virtual void send_data(Frame frame) = 0;
};

struct PingAppConfig {
    DeviceAddress owner;
    DeviceAddress dest;
    SimTime send_interval = SimTime::from_ms(1000);
    SimTime start_offset;
    std::string payload_prefix = "ping";

    void validate() const {
        if (send_interval <= kZeroTime)
            throw std::invalid_argument("ping send_interval must be positive");
        if (owner == dest)
            throw std::invalid_argument("ping app cannot target its own host");
        if (payload_prefix.empty())
            throw std::invalid_argument("ping payload prefix must not be empty");
    }

    bool operator==(const PingAppConfig&) const = default;
};

struct PingStats {
    std::uint64_t sent = 0;
    std::uint64_t received = 0;  // requests that reached the destination
    std::uint64_t replies = 0;
    std::vector<SimTime> rtts;
};

inline constexpr std::string_view kReplySuffix = "-reply";

inline bool is_reply_tag(std::string_view tag) { return tag.ends_with(kReplySuffix); }

/// Splits "ping9" / "ping9-reply" into prefix and sequence number.
inline std::optional<std::pair<std::string, std::uint64_t>> split_ping_tag(std::string_view tag) {
    if (is_reply_tag(tag))
        tag.remove_suffix(kReplySuffix.size());
    std::size_t digits = 0;
    while (digits < tag.size() && tag[tag.size() - 1 - digits] >= '0' && tag[tag.size() - 1 - digits] <= '9')
        ++digits;
    if (digits == 0 || digits == tag.size() || digits > 18)
        return std::nullopt;
    std::uint64_t seq = 0;
    for (char c : tag.substr(tag.size() - digits))
        seq = seq * 10 + static_cast<std::uint64_t>(c - '0');
    return std::pair{std::string(tag.substr(0, tag.size() - digits)), seq};
}

class PingApp;

/// Per-device data plane: originates pings, answers them, and relays
/// client-to-client traffic when the device is the group owner.
class DataPlane {
public:
    using RequestHook = std::function<void(const Frame&)>;

    DataPlane(Engine& engine, GroupLink& link) : engine_(engine), link_(link) {}

    void attach(PingApp& app);
    void set_request_hook(RequestHook hook) { request_hook_ = std::move(hook); }

    /// Sends a new end-to-end Data frame. Returns false (nothing sent) while
    /// the device is outside a group, or when the GO does not have `final_dst`
    /// as a member yet.
    bool originate(DeviceAddress final_dst, std::string tag) {
        if (!link_.in_group())
            return false;
        Frame f;
        f.kind = FrameKind::Data;
        f.origin = link_.address();
        f.final_dst = final_dst;
        f.payload_tag = std::move(tag);
        if (link_.is_group_owner()) {
            if (!link_.has_member(final_dst))
                return false;
            f.dst = final_dst;
        } else {
            f.dst = *link_.group_owner();
        }
        link_.send_data(std::move(f));
        return true;
    }

    /// Handles a Data frame whose hop destination is this device.
    void on_data(const Frame& f) {
        if (!link_.in_group())
            return;
        const DeviceAddress self = link_.address();
        if (*f.final_dst == self) {
            if (is_reply_tag(*f.payload_tag)) {
                deliver_reply(f);
            } else {
                if (request_hook_)
                    request_hook_(f);
                originate(*f.origin, *f.payload_tag + std::string(kReplySuffix));
            }
            return;
        }
        if (!link_.is_group_owner() || !link_.has_member(*f.final_dst)) {
            ++relay_drops_;
            return;
        }
        Frame fwd = f;
        fwd.dst = *f.final_dst;
        fwd.retry = false;
        ++relayed_;
        link_.send_data(std::move(fwd));
    }

    std::uint64_t relay_drops() const { return relay_drops_; }
    std::uint64_t relayed() const { return relayed_; }

private:
    void deliver_reply(const Frame& f);

    Engine& engine_;
    GroupLink& link_;
    std::vector<PingApp*> apps_;
    RequestHook request_hook_;
    std::uint64_t relay_drops_ = 0;
    std::uint64_t relayed_ = 0;
};

/// Periodic ping generator. Sequence numbers advance once per interval tick,
/// whether or not the ping could be sent.
class PingApp {
public:
    PingApp(Engine& engine, DataPlane& plane, PingAppConfig cfg)
        : engine_(engine), plane_(plane), cfg_(std::move(cfg)) {
        cfg_.validate();
        plane_.attach(*this);
    }

    PingApp(const PingApp&) = delete;
    PingApp& operator=(const PingApp&) = delete;

    void start() {
        engine_.schedule(std::max(cfg_.start_offset, engine_.now()), [this] { tick(0); }, "ping-tick");
    }

    /// Emits "<prefix><seq>" toward dest. Returns false when deferred.
    bool send_ping(std::uint64_t seq) {
        if (!plane_.originate(cfg_.dest, cfg_.payload_prefix + std::to_string(seq)))
            return false;
        ++stats_.sent;
        outstanding_[seq] = engine_.now();
        return true;
    }

    void note_request_delivered() { ++stats_.received; }

    void on_reply(const Frame& f) {
        auto parsed = split_ping_tag(*f.payload_tag);
        if (!parsed)
            return;
        auto it = outstanding_.find(parsed->second);
        if (it == outstanding_.end())
            return;
        ++stats_.replies;
        stats_.rtts.push_back(engine_.now() - it->second);
        outstanding_.erase(it);
    }

    bool matches_reply(const Frame& f) const {
        if (*f.origin != cfg_.dest)
            return false;
        auto parsed = split_ping_tag(*f.payload_tag);
        return parsed && parsed->first == cfg_.payload_prefix;
    }

    const PingAppConfig& config() const { return cfg_; }
    const PingStats& stats() const { return stats_; }

private:
    void tick(std::uint64_t seq) {
        send_ping(seq);
        engine_.schedule_in(cfg_.send_interval, [this, seq] { tick(seq + 1); }, "ping-tick");
    }

    Engine& engine_;
    DataPlane& plane_;
    PingAppConfig cfg_;
    PingStats stats_;
    std::map<std::uint64_t, SimTime> outstanding_;
};

inline void DataPlane::attach(PingApp& app) { apps_.push_back(&app); }

inline void DataPlane::deliver_reply(const Frame& f) {
    for (PingApp* app : apps_) {
        if (app->matches_reply(f)) {
            app->on_reply(f);
            return;
        }
    }
}

} // namespace wfd
