#pragma once

#include "wfdsim/medium.hpp"
#include "wfdsim/sim_time.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace wfd {

inline constexpr int kMetricsSchemaVersion = 1;

struct HostMetrics {
    std::string name;
    /// Scan start to first Negotiating/Joining entry. Absent means either
    /// "timeout" (scanned, never discovered) or "n/a" (never scanned).
    std::optional<SimTime> discovery_duration;
    bool discovery_timeout = false;
    std::optional<SimTime> association_time;
    std::string final_state;
    std::string role;  // "GO", "Client" or "none"
};

struct PingMetrics {
    std::string owner;
    std::string dest;
    std::uint64_t sent = 0;
    std::uint64_t received = 0;
    std::uint64_t replies = 0;
    std::optional<SimTime> rtt_min;
    std::optional<SimTime> rtt_mean;
    std::optional<SimTime> rtt_max;
};

struct MetricsReport {
    std::uint64_t seed = 0;
    SimTime horizon;
    std::vector<HostMetrics> hosts;
    std::optional<SimTime> formation_time;
    std::vector<PingMetrics> pings;
    std::uint64_t relay_drops = 0;
    MediumStats medium;

    /// Flat `key = value` document, one metric per line.
    std::string to_flat() const {
        std::ostringstream out;
        auto opt = [](const std::optional<SimTime>& t, const char* absent) {
            return t ? t->to_string() : std::string(absent);
        };
        out << "schema_version = " << kMetricsSchemaVersion << "\n";
        out << "seed = " << seed << "\n";
        out << "horizon = " << horizon.to_string() << "\n";
        for (const auto& h : hosts) {
            out << h.name << ".discovery_duration = "
                << opt(h.discovery_duration, h.discovery_timeout ? "timeout" : "n/a") << "\n";
            out << h.name << ".association_time = " << opt(h.association_time, "none") << "\n";
            out << h.name << ".role = " << h.role << "\n";
            out << h.name << ".final_state = " << h.final_state << "\n";
        }
        out << "formation_time = " << opt(formation_time, "timeout") << "\n";
        for (std::size_t i = 0; i < pings.size(); ++i) {
            const auto& p = pings[i];
            const std::string k = "ping[" + std::to_string(i) + "].";
            out << k << "owner = " << p.owner << "\n"
                << k << "dest = " << p.dest << "\n"
                << k << "sent = " << p.sent << "\n"
                << k << "received = " << p.received << "\n"
                << k << "replies = " << p.replies << "\n"
                << k << "rtt_min = " << opt(p.rtt_min, "none") << "\n"
                << k << "rtt_mean = " << opt(p.rtt_mean, "none") << "\n"
                << k << "rtt_max = " << opt(p.rtt_max, "none") << "\n";
        }
        out << "relay_drops = " << relay_drops << "\n";
        out << "medium.transmissions = " << medium.transmissions << "\n"
            << "medium.deliveries = " << medium.deliveries << "\n"
            << "medium.losses = " << medium.losses << "\n"
            << "medium.retransmissions = " << medium.retransmissions << "\n"
            << "medium.failed = " << medium.failed << "\n";
        return out.str();
    }

    nlohmann::json to_json() const {
        using nlohmann::json;
        auto opt = [](const std::optional<SimTime>& t) -> json {
            return t ? json(t->to_string()) : json(nullptr);
        };
        json j;
        j["schema_version"] = kMetricsSchemaVersion;
        j["seed"] = seed;
        j["horizon"] = horizon.to_string();
        j["hosts"] = json::array();
        for (const auto& h : hosts) {
            json hj{{"name", h.name},
                    {"discovery_duration", opt(h.discovery_duration)},
                    {"association_time", opt(h.association_time)},
                    {"role", h.role},
                    {"final_state", h.final_state}};
            if (!h.discovery_duration)
                hj["discovery_status"] = h.discovery_timeout ? "timeout" : "n/a";
            j["hosts"].push_back(std::move(hj));
        }
        j["formation_time"] = opt(formation_time);
        j["pings"] = json::array();
        for (const auto& p : pings)
            j["pings"].push_back({{"owner", p.owner},
                                  {"dest", p.dest},
                                  {"sent", p.sent},
                                  {"received", p.received},
                                  {"replies", p.replies},
                                  {"rtt_min", opt(p.rtt_min)},
                                  {"rtt_mean", opt(p.rtt_mean)},
                                  {"rtt_max", opt(p.rtt_max)}});
        j["relay_drops"] = relay_drops;
        j["medium"] = {{"transmissions", medium.transmissions}, {"deliveries", medium.deliveries},
                       {"losses", medium.losses},               {"retransmissions", medium.retransmissions},
                       {"acked", medium.acked},                 {"failed", medium.failed}};
        return j;
    }
};

/// Aggregate of discovery durations over a seed sweep.
struct SweepReport {
    std::uint64_t first_seed = 0;
    std::size_t runs = 0;
    std::vector<std::optional<SimTime>> per_run;  // slowest host of each run; nullopt = timeout
    std::vector<SimTime> samples;                 // every host's discovery duration
    std::size_t timeouts = 0;
    SimTime bin_width = SimTime::from_ms(500);
    std::vector<std::size_t> histogram;  // bins of bin_width from 0; the last bin collects overflow

    double mean_seconds() const {
        if (samples.empty())
            return 0.0;
        double sum = 0.0;
        for (SimTime s : samples)
            sum += s.seconds();
        return sum / static_cast<double>(samples.size());
    }
    std::optional<SimTime> min() const {
        if (samples.empty())
            return std::nullopt;
        return *std::min_element(samples.begin(), samples.end());
    }
    std::optional<SimTime> max() const {
        if (samples.empty())
            return std::nullopt;
        return *std::max_element(samples.begin(), samples.end());
    }
    /// Runs in which every host discovered within `limit`.
    std::size_t completed_within(SimTime limit) const {
        return static_cast<std::size_t>(
            std::count_if(per_run.begin(), per_run.end(), [&](const auto& t) { return t && *t <= limit; }));
    }

    std::string to_text() const {
        std::ostringstream out;
        char buf[64];
        out << "runs = " << runs << "\n";
        out << "first_seed = " << first_seed << "\n";
        out << "samples = " << samples.size() << "\n";
        out << "timeouts = " << timeouts << "\n";
        std::snprintf(buf, sizeof buf, "%.6f", mean_seconds());
        out << "discovery_mean = " << buf << "\n";
        out << "discovery_min = " << (min() ? min()->to_string() : "none") << "\n";
        out << "discovery_max = " << (max() ? max()->to_string() : "none") << "\n";
        out << "completed_within_10s = " << completed_within(SimTime::from_ms(10'000)) << "\n";
        for (std::size_t i = 0; i < histogram.size(); ++i) {
            const SimTime lo = bin_width * static_cast<std::int64_t>(i);
            std::snprintf(buf, sizeof buf, "%.1f", lo.seconds());
            out << "histogram[" << buf << (i + 1 == histogram.size() ? "+" : "") << "] = " << histogram[i] << "\n";
        }
        return out.str();
    }
};

} // namespace wfd
