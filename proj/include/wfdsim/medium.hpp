#pragma once

#include "wfdsim/engine.hpp"
#include "wfdsim/frame.hpp"
#include "wfdsim/rng.hpp"

#include <algorithm>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace wfd {

struct MediumParams {
    SimTime frame_airtime = SimTime::from_us(314);
    SimTime ack_turnaround = SimTime::from_us(40);  // also used as the inter-frame gap
    double loss_probability = 0.0;
    SimTime ack_timeout = SimTime::from_ms(2);
    int max_retries = 3;
    int channel_count = 11;

    void validate() const {
        if (frame_airtime <= kZeroTime || ack_turnaround <= kZeroTime || ack_timeout <= kZeroTime)
            throw std::invalid_argument("medium durations must be positive");
        if (!(loss_probability >= 0.0 && loss_probability <= 1.0))
            throw std::invalid_argument("loss_probability must be in [0,1]");
        if (max_retries < 0)
            throw std::invalid_argument("max_retries must be >= 0");
        if (channel_count < 1)
            throw std::invalid_argument("channel_count must be >= 1");
        if (ack_timeout <= ack_turnaround + frame_airtime)
            throw std::invalid_argument("ack_timeout must exceed ack_turnaround + frame_airtime");
    }

    bool operator==(const MediumParams&) const = default;
};

enum class SendOutcome { Acked, Failed, Sent };

struct MediumStats {
    std::uint64_t transmissions = 0;
    std::uint64_t deliveries = 0;
    std::uint64_t losses = 0;
    std::uint64_t retransmissions = 0;
    std::uint64_t acked = 0;
    std::uint64_t failed = 0;
    std::uint64_t duplicates = 0;
};

/// One delivery event: a transmitted frame and the devices that received it.
struct Delivery {
    std::uint64_t event_id = 0;
    SimTime time;
    const Frame& frame;
    const std::vector<DeviceAddress>& receivers;
};

/// Multi-channel broadcast medium with a per-device MAC transmit queue.
///
/// Every transmission reaches all other devices tuned to its channel at start
/// of transmission, `frame_airtime` later. Unicast frames are acknowledged by
/// their destination after `ack_turnaround`; `send()` retries unacknowledged
/// frames up to `max_retries` times. There is no contention model.
class Medium {
public:
    using Receiver = std::function<void(const Frame&)>;
    using Observer = std::function<void(const Delivery&)>;
    using OutcomeCallback = std::function<void(SendOutcome)>;
    using DropFilter = std::function<bool(const Frame&, DeviceAddress receiver)>;

    Medium(Engine& engine, MediumParams params, Rng loss_rng)
        : engine_(engine), params_(params), rng_(loss_rng) {
        params_.validate();
    }

    Medium(const Medium&) = delete;
    Medium& operator=(const Medium&) = delete;

    const MediumParams& params() const { return params_; }
    const MediumStats& stats() const { return stats_; }

    void register_device(DeviceAddress addr, ChannelIndex initial, Receiver receiver) {
        check_channel(initial);
        if (addr.is_broadcast())
            throw std::invalid_argument("cannot register the broadcast address");
        auto [it, inserted] = devices_.try_emplace(addr);
        if (!inserted)
            throw std::invalid_argument("device registered twice: " + addr.to_string());
        it->second.channel = initial;
        it->second.receiver = std::move(receiver);
    }

    bool registered(DeviceAddress addr) const { return devices_.contains(addr); }

    /// Retunes immediately. Queued or in-flight frames for another channel are
    /// discarded without invoking their callbacks.
    void tune(DeviceAddress addr, ChannelIndex channel) {
        check_channel(channel);
        Device& d = device(addr);
        if (d.channel == channel)
            return;
        d.channel = channel;
        if (d.in_flight && d.in_flight->frame.channel != channel)
            abort_in_flight(d);
        std::erase_if(d.queue, [&](const Queued& q) { return q.frame.channel != channel; });
        kick(addr);
    }

    ChannelIndex channel_of(DeviceAddress addr) const { return device(addr).channel; }

    /// Drops every queued and in-flight frame of `addr` without callbacks.
    void flush(DeviceAddress addr) {
        Device& d = device(addr);
        d.queue.clear();
        if (d.in_flight)
            abort_in_flight(d);
    }

    bool idle(DeviceAddress addr) const {
        const Device& d = device(addr);
        return !d.in_flight && d.queue.empty();
    }

    /// Raw transmission starting at `at`; no retry or ACK wait on the sender side.
    void transmit(Frame frame, SimTime at) {
        validate_frame(frame);
        device(frame.src);
        if (frame.mac_seq == 0)
            frame.mac_seq = ++device(frame.src).next_mac_seq;
        engine_.schedule(at, [this, frame]() mutable { start_transmission(std::move(frame)); }, "tx-start");
    }

    /// Queued MAC send. Unicast frames complete with Acked or Failed after
    /// retries; broadcast frames complete with Sent at end of airtime.
    void send(Frame frame, OutcomeCallback done = {}) {
        validate_frame(frame);
        if (frame.kind == FrameKind::Ack)
            throw std::invalid_argument("ACK frames are generated by the medium");
        check_channel(frame.channel);
        Device& d = device(frame.src);
        d.queue.push_back(Queued{std::move(frame), std::move(done)});
        kick(d.queue.back().frame.src);
    }

    void set_drop_filter(DropFilter filter) { drop_filter_ = std::move(filter); }
    void add_observer(Observer observer) { observers_.push_back(std::move(observer)); }

private:
    struct Queued {
        Frame frame;
        OutcomeCallback done;
    };
    struct InFlight {
        Frame frame;
        OutcomeCallback done;
        int attempts = 0;
        EventHandle start_event;
        EventHandle timeout_event;
        bool started = false;
    };
    struct Device {
        ChannelIndex channel = 0;
        Receiver receiver;
        std::deque<Queued> queue;
        std::optional<InFlight> in_flight;
        SimTime busy_until;
        std::uint32_t next_mac_seq = 0;
        std::map<DeviceAddress, std::uint32_t> last_seq_from;  // duplicate detection
    };

    void check_channel(ChannelIndex c) const {
        if (c < 0 || c >= params_.channel_count)
            throw std::out_of_range("channel " + std::to_string(c) + " outside [0," +
                                    std::to_string(params_.channel_count) + ")");
    }

    Device& device(DeviceAddress a) {
        auto it = devices_.find(a);
        if (it == devices_.end())
            throw std::invalid_argument("unknown device " + a.to_string());
        return it->second;
    }
    const Device& device(DeviceAddress a) const {
        auto it = devices_.find(a);
        if (it == devices_.end())
            throw std::invalid_argument("unknown device " + a.to_string());
        return it->second;
    }

    void abort_in_flight(Device& d) {
        engine_.cancel(d.in_flight->start_event);
        engine_.cancel(d.in_flight->timeout_event);
        d.in_flight.reset();
    }

    SimTime next_start(const Device& d) const {
        return std::max(engine_.now(), d.busy_until) + params_.ack_turnaround;
    }

    void kick(DeviceAddress addr) {
        Device& d = device(addr);
        if (d.in_flight || d.queue.empty())
            return;
        Queued q = std::move(d.queue.front());
        d.queue.pop_front();
        q.frame.mac_seq = ++d.next_mac_seq;
        q.frame.retry = false;
        d.in_flight = InFlight{std::move(q.frame), std::move(q.done), 0, {}, {}, false};
        schedule_attempt(addr, next_start(d));
    }

    void schedule_attempt(DeviceAddress addr, SimTime at) {
        Device& d = device(addr);
        d.in_flight->started = false;
        d.in_flight->start_event = engine_.schedule(at, [this, addr] { begin_attempt(addr); }, "mac-attempt");
    }

    void begin_attempt(DeviceAddress addr) {
        Device& d = device(addr);
        if (!d.in_flight)
            return;
        if (engine_.now() < d.busy_until) {
            schedule_attempt(addr, d.busy_until + params_.ack_turnaround);
            return;
        }
        InFlight& f = *d.in_flight;
        if (d.channel != f.frame.channel)
            throw std::logic_error("sender not tuned to frame channel");
        f.started = true;
        f.frame.retry = f.attempts > 0;
        if (f.attempts > 0)
            ++stats_.retransmissions;
        ++f.attempts;
        start_transmission(f.frame);
        if (f.frame.is_unicast()) {
            f.timeout_event = engine_.schedule_in(params_.frame_airtime + params_.ack_timeout,
                                                  [this, addr] { on_ack_timeout(addr); }, "ack-timeout");
        } else {
            f.timeout_event = engine_.schedule_in(params_.frame_airtime,
                                                  [this, addr] { complete(addr, SendOutcome::Sent); }, "tx-done");
        }
    }

    void on_ack_timeout(DeviceAddress addr) {
        Device& d = device(addr);
        if (!d.in_flight)
            return;
        if (d.in_flight->attempts < 1 + params_.max_retries) {
            schedule_attempt(addr, std::max(engine_.now(), d.busy_until));
            return;
        }
        ++stats_.failed;
        complete(addr, SendOutcome::Failed);
    }

    void complete(DeviceAddress addr, SendOutcome outcome) {
        Device& d = device(addr);
        OutcomeCallback done = std::move(d.in_flight->done);
        engine_.cancel(d.in_flight->timeout_event);
        d.in_flight.reset();
        if (done)
            done(outcome);
        kick(addr);
    }

    void start_transmission(Frame frame) {
        Device& src = device(frame.src);
        if (src.channel != frame.channel)
            return;  // radio moved away before the (ACK) transmission started
        src.busy_until = std::max(src.busy_until, engine_.now() + params_.frame_airtime);
        std::vector<DeviceAddress> receivers;
        for (const auto& [addr, dev] : devices_)
            if (addr != frame.src && dev.channel == frame.channel)
                receivers.push_back(addr);
        // The addressee of a unicast frame is listed first, bystanders follow in address order.
        std::stable_partition(receivers.begin(), receivers.end(), [&](DeviceAddress a) { return a == frame.dst; });
        ++stats_.transmissions;
        engine_.schedule_in(params_.frame_airtime,
                            [this, frame = std::move(frame), receivers = std::move(receivers)] {
                                deliver(frame, receivers);
                            },
                            "delivery");
    }

    void deliver(const Frame& frame, const std::vector<DeviceAddress>& candidates) {
        std::vector<DeviceAddress> got;
        got.reserve(candidates.size());
        for (DeviceAddress r : candidates) {
            bool lost = drop_filter_ && drop_filter_(frame, r);
            if (!lost && params_.loss_probability > 0.0)
                lost = rng_.bernoulli(params_.loss_probability);
            if (lost) {
                ++stats_.losses;
                continue;
            }
            got.push_back(r);
        }
        stats_.deliveries += got.size();
        const Delivery delivery{engine_.current_event_id(), engine_.now(), frame, got};
        for (const auto& obs : observers_)
            obs(delivery);

        if (frame.kind == FrameKind::Ack) {
            for (DeviceAddress r : got)
                if (r == frame.dst)
                    on_ack(r, frame);
            return;
        }
        bool duplicate = false;
        if (frame.is_unicast() && std::find(got.begin(), got.end(), frame.dst) != got.end()) {
            Device& rx = device(frame.dst);
            SimTime ack_at = std::max(engine_.now() + params_.ack_turnaround, rx.busy_until);
            rx.busy_until = ack_at + params_.frame_airtime;
            Frame ack;
            ack.kind = FrameKind::Ack;
            ack.src = frame.dst;
            ack.dst = frame.src;
            ack.channel = frame.channel;
            ack.mac_seq = frame.mac_seq;
            transmit(std::move(ack), ack_at);

            auto [it, fresh] = rx.last_seq_from.try_emplace(frame.src, frame.mac_seq);
            if (!fresh) {
                duplicate = frame.retry && it->second == frame.mac_seq;
                it->second = frame.mac_seq;
            }
            if (duplicate)
                ++stats_.duplicates;
        }
        for (DeviceAddress r : got) {
            if (duplicate && r == frame.dst)
                continue;
            Device& rx = device(r);
            if (rx.receiver)
                rx.receiver(frame);
        }
    }

    void on_ack(DeviceAddress sender, const Frame& ack) {
        Device& d = device(sender);
        if (!d.in_flight || !d.in_flight->started)
            return;
        const Frame& f = d.in_flight->frame;
        if (!f.is_unicast() || f.dst != ack.src || f.mac_seq != ack.mac_seq)
            return;
        ++stats_.acked;
        complete(sender, SendOutcome::Acked);
    }

    Engine& engine_;
    MediumParams params_;
    Rng rng_;
    MediumStats stats_;
    std::map<DeviceAddress, Device> devices_;
    std::vector<Observer> observers_;
    DropFilter drop_filter_;
};

} // namespace wfd
