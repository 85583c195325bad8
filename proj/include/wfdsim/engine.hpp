#pragma once

#include "wfdsim/sim_time.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>

namespace wfd {

/// Thrown when an event is scheduled before the current simulated time.
class PastEventError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Opaque reference to a scheduled event; valid until it fires or is cancelled.
struct EventHandle {
    std::uint64_t seq = 0;
    bool valid() const { return seq != 0; }
    auto operator<=>(const EventHandle&) const = default;
};

/// Single-threaded discrete-event core.
///
/// Events are ordered by (fire time, insertion seq). Event ids are handed out
/// when an event fires, so they are dense and strictly increasing in firing
/// order.
class Engine {
public:
    using Action = std::function<void()>;

    SimTime now() const { return now_; }

    /// Id of the event currently firing (or the last one fired).
    std::uint64_t current_event_id() const { return last_id_; }

    EventHandle schedule(SimTime at, Action action, std::string tag = {}) {
        if (at < now_)
            throw PastEventError("past event: t=" + at.to_string() + " < now=" + now_.to_string() +
                                 (tag.empty() ? std::string{} : " (" + tag + ")"));
        const std::uint64_t seq = ++next_seq_;
        queue_.emplace(Key{at, seq}, Pending{std::move(action), std::move(tag)});
        index_.emplace(seq, at);
        ++scheduled_;
        return EventHandle{seq};
    }

    EventHandle schedule_in(SimTime delay, Action action, std::string tag = {}) {
        return schedule(now_ + delay, std::move(action), std::move(tag));
    }

    /// True if the event was pending and is now removed.
    bool cancel(EventHandle h) {
        auto it = index_.find(h.seq);
        if (it == index_.end())
            return false;
        queue_.erase(Key{it->second, h.seq});
        index_.erase(it);
        ++cancelled_;
        return true;
    }

    bool pending(EventHandle h) const { return index_.contains(h.seq); }

    /// Fires every event with fire time <= stop, then parks the clock at stop.
    std::size_t run_until(SimTime stop) {
        if (stop < now_)
            throw PastEventError("run_until: stop " + stop.to_string() + " before now " + now_.to_string());
        std::size_t count = 0;
        while (!queue_.empty()) {
            auto it = queue_.begin();
            if (it->first.time > stop)
                break;
            const Key key = it->first;
            Action action = std::move(it->second.action);
            queue_.erase(it);
            index_.erase(key.seq);
            now_ = key.time;
            ++last_id_;
            ++fired_;
            ++count;
            if (action)
                action();
        }
        now_ = stop;
        return count;
    }

    std::size_t queued() const { return queue_.size(); }
    std::uint64_t scheduled_count() const { return scheduled_; }
    std::uint64_t fired_count() const { return fired_; }
    std::uint64_t cancelled_count() const { return cancelled_; }

private:
    struct Key {
        SimTime time;
        std::uint64_t seq;
        auto operator<=>(const Key&) const = default;
    };
    struct Pending {
        Action action;
        std::string tag;
    };

    SimTime now_{};
    std::uint64_t next_seq_ = 0;
    std::uint64_t last_id_ = 0;
    std::uint64_t scheduled_ = 0;
    std::uint64_t fired_ = 0;
    std::uint64_t cancelled_ = 0;
    std::map<Key, Pending> queue_;
    std::unordered_map<std::uint64_t, SimTime> index_;
};

} // namespace wfd
