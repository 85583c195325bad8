#pragma once

#include "wfdsim/config.hpp"
#include "wfdsim/engine.hpp"
#include "wfdsim/medium.hpp"
#include "wfdsim/metrics.hpp"
#include "wfdsim/peer.hpp"
#include "wfdsim/trace.hpp"
#include "wfdsim/traffic.hpp"

#include <cstdint>
#include <future>
#include <memory>
#include <string>
#include <vector>

namespace wfd {

/// Substream index of the medium's loss generator; devices use their host index.
inline constexpr std::uint64_t kMediumStream = 0x4D454449554D0000ull;

/// A transmitted frame with the receivers that got it.
struct FrameRecord {
    std::uint64_t event_id = 0;
    SimTime time;
    Frame frame;
    std::vector<DeviceAddress> receivers;
};

/// Wires engine, medium, peers and ping apps for one run.
class Scenario {
public:
    explicit Scenario(ScenarioConfig cfg)
        : cfg_(std::move(cfg)), medium_(engine_, cfg_.medium, Rng::substream(cfg_.seed, kMediumStream)) {
        cfg_.validate();
        for (int i = 0; i < cfg_.host_count; ++i) {
            auto host = std::make_unique<Host>();
            host->peer = std::make_unique<Peer>(engine_, medium_, cfg_.hosts[static_cast<std::size_t>(i)],
                                                Rng::substream(cfg_.seed, static_cast<std::uint64_t>(i)));
            host->data = std::make_unique<DataPlane>(engine_, *host->peer);
            host->peer->set_data_handler([d = host->data.get()](const Frame& f) { d->on_data(f); });
            hosts_.push_back(std::move(host));
        }
        for (const auto& app_cfg : cfg_.ping_apps) {
            Host& owner = *hosts_[static_cast<std::size_t>(app_cfg.owner.host_index())];
            apps_.push_back(std::make_unique<PingApp>(engine_, *owner.data, app_cfg));
        }
        for (auto& host : hosts_) {
            host->data->set_request_hook([this](const Frame& f) {
                for (auto& app : apps_)
                    if (app->config().owner == *f.origin && app->config().dest == *f.final_dst &&
                        split_ping_tag(*f.payload_tag) &&
                        split_ping_tag(*f.payload_tag)->first == app->config().payload_prefix)
                        app->note_request_delivered();
            });
        }
        medium_.add_observer([this](const Delivery& d) { record(d); });
    }

    Scenario(const Scenario&) = delete;
    Scenario& operator=(const Scenario&) = delete;

    void start() {
        if (started_)
            return;
        started_ = true;
        for (auto& h : hosts_)
            h->peer->start();
        for (auto& a : apps_)
            a->start();
    }

    /// Runs to the configured horizon.
    void run() { run_until(cfg_.horizon); }

    void run_until(SimTime stop) {
        start();
        engine_.run_until(stop);
    }

    const ScenarioConfig& config() const { return cfg_; }
    Engine& engine() { return engine_; }
    Medium& medium() { return medium_; }
    std::size_t host_count() const { return hosts_.size(); }
    Peer& peer(std::size_t i) { return *hosts_.at(i)->peer; }
    const Peer& peer(std::size_t i) const { return *hosts_.at(i)->peer; }
    DataPlane& data_plane(std::size_t i) { return *hosts_.at(i)->data; }
    std::size_t ping_count() const { return apps_.size(); }
    const PingApp& ping(std::size_t i) const { return *apps_.at(i); }

    const std::vector<TraceRecord>& trace() const { return trace_; }
    const std::vector<FrameRecord>& frames() const { return frames_; }
    std::string trace_text() const { return to_trace_text(trace_); }

    MetricsReport metrics() const {
        MetricsReport m;
        m.seed = cfg_.seed;
        m.horizon = cfg_.horizon;
        bool all_formed = true;
        bool any_enabled = false;
        SimTime latest;
        for (const auto& h : hosts_) {
            const Peer& p = *h->peer;
            HostMetrics hm;
            hm.name = host_name(p.address());
            hm.discovery_duration = p.discovery_duration();
            hm.discovery_timeout = !hm.discovery_duration && p.first_scan_start().has_value();
            hm.association_time = p.first_association();
            hm.final_state = std::string(to_string(p.state()));
            hm.role = p.role() ? std::string(to_string(*p.role())) : "none";
            if (p.config().wifi_direct_used) {
                any_enabled = true;
                if (p.first_association())
                    latest = std::max(latest, *p.first_association());
                else
                    all_formed = false;
            }
            m.relay_drops += h->data->relay_drops();
            m.hosts.push_back(std::move(hm));
        }
        if (any_enabled && all_formed)
            m.formation_time = latest;
        for (const auto& app : apps_) {
            const PingStats& s = app->stats();
            PingMetrics pm;
            pm.owner = host_name(app->config().owner);
            pm.dest = host_name(app->config().dest);
            pm.sent = s.sent;
            pm.received = s.received;
            pm.replies = s.replies;
            if (!s.rtts.empty()) {
                SimTime sum;
                for (SimTime r : s.rtts)
                    sum += r;
                pm.rtt_min = *std::min_element(s.rtts.begin(), s.rtts.end());
                pm.rtt_max = *std::max_element(s.rtts.begin(), s.rtts.end());
                pm.rtt_mean = sum / static_cast<std::int64_t>(s.rtts.size());
            }
            m.pings.push_back(std::move(pm));
        }
        m.medium = medium_.stats();
        return m;
    }

private:
    struct Host {
        std::unique_ptr<Peer> peer;
        std::unique_ptr<DataPlane> data;
    };

    void record(const Delivery& d) {
        if (d.receivers.empty())
            return;
        frames_.push_back(FrameRecord{d.event_id, d.time, d.frame, d.receivers});
        const std::string src = host_name(d.frame.src);
        const std::string name = trace_name(d.frame);
        for (DeviceAddress r : d.receivers)
            trace_.push_back(TraceRecord{d.event_id, d.time, src, host_name(r), name});
    }

    ScenarioConfig cfg_;
    Engine engine_;
    Medium medium_;
    std::vector<std::unique_ptr<Host>> hosts_;
    std::vector<std::unique_ptr<PingApp>> apps_;
    std::vector<TraceRecord> trace_;
    std::vector<FrameRecord> frames_;
    bool started_ = false;
};

/// Runs `runs` consecutive seeds starting at `first_seed` and aggregates
/// discovery durations. Runs are independent and may execute on `jobs` threads;
/// results are merged in seed order.
inline SweepReport run_sweep(const ScenarioConfig& base, std::size_t runs, std::uint64_t first_seed,
                             unsigned jobs = 1) {
    struct RunOutcome {
        std::vector<std::optional<SimTime>> durations;
    };
    auto one = [&base](std::uint64_t seed) {
        ScenarioConfig cfg = base;
        cfg.seed = seed;
        Scenario s(std::move(cfg));
        s.run();
        RunOutcome out;
        for (std::size_t i = 0; i < s.host_count(); ++i) {
            const Peer& p = s.peer(i);
            if (!p.config().wifi_direct_used || p.config().autonomous_go)
                continue;
            out.durations.push_back(p.discovery_duration());
        }
        return out;
    };

    std::vector<RunOutcome> outcomes(runs);
    if (jobs <= 1) {
        for (std::size_t i = 0; i < runs; ++i)
            outcomes[i] = one(first_seed + i);
    } else {
        for (std::size_t start = 0; start < runs; start += jobs) {
            std::vector<std::future<RunOutcome>> batch;
            for (std::size_t i = start; i < std::min(runs, start + jobs); ++i)
                batch.push_back(std::async(std::launch::async, one, first_seed + i));
            for (std::size_t k = 0; k < batch.size(); ++k)
                outcomes[start + k] = batch[k].get();
        }
    }

    SweepReport rep;
    rep.first_seed = first_seed;
    rep.runs = runs;
    rep.histogram.assign(21, 0);
    for (const auto& o : outcomes) {
        std::optional<SimTime> slowest = SimTime{};
        for (const auto& d : o.durations) {
            if (!d) {
                ++rep.timeouts;
                slowest.reset();
                continue;
            }
            rep.samples.push_back(*d);
            const auto bin = std::min<std::size_t>(static_cast<std::size_t>(d->ticks() / rep.bin_width.ticks()),
                                                   rep.histogram.size() - 1);
            ++rep.histogram[bin];
            if (slowest)
                slowest = std::max(*slowest, *d);
        }
        if (o.durations.empty())
            slowest.reset();
        rep.per_run.push_back(slowest);
    }
    return rep;
}

} // namespace wfd
