#pragma once

#include "wfdsim/medium.hpp"
#include "wfdsim/peer.hpp"
#include "wfdsim/traffic.hpp"

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace wfd {

struct ScenarioConfig {
    int host_count = 0;
    std::vector<PeerConfig> hosts;
    std::vector<PingAppConfig> ping_apps;
    MediumParams medium;
    std::uint64_t seed = 1;
    SimTime horizon = SimTime::from_ms(20'000);

    /// Standard-formation peers with default settings.
    static ScenarioConfig with_hosts(int count) {
        ScenarioConfig c;
        c.host_count = count;
        for (int i = 0; i < count; ++i) {
            PeerConfig p;
            p.address = DeviceAddress::for_host(static_cast<std::uint16_t>(i));
            c.hosts.push_back(std::move(p));
        }
        return c;
    }

    void validate() const {
        if (host_count < 0 || static_cast<std::size_t>(host_count) != hosts.size())
            throw std::invalid_argument("host_count does not match host list");
        medium.validate();
        for (const auto& h : hosts)
            h.validate();
        for (const auto& p : ping_apps) {
            p.validate();
            if (p.owner.host_index() >= host_count || p.dest.host_index() >= host_count)
                throw std::invalid_argument("ping app references a missing host");
        }
        // Same owner, dest and prefix would put identical tags on the wire.
        for (std::size_t i = 0; i < ping_apps.size(); ++i)
            for (std::size_t j = 0; j < i; ++j)
                if (ping_apps[i].owner == ping_apps[j].owner && ping_apps[i].dest == ping_apps[j].dest &&
                    ping_apps[i].payload_prefix == ping_apps[j].payload_prefix)
                    throw std::invalid_argument(host_name(ping_apps[i].owner) + " has two ping apps toward " +
                                                host_name(ping_apps[i].dest) + " with prefix '" +
                                                ping_apps[i].payload_prefix + "'");
        if (horizon < kZeroTime)
            throw std::invalid_argument("horizon must be non-negative");
    }

    bool operator==(const ScenarioConfig&) const = default;
};

class ConfigError : public std::runtime_error {
public:
    ConfigError(int line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

struct ParseOptions {
    int default_host_count = 2;
};

struct ParseResult {
    ScenarioConfig config;
    std::vector<std::string> warnings;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

/// Strips a trailing `#` comment that is not inside double quotes.
inline std::string_view strip_comment(std::string_view line) {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"')
            quoted = !quoted;
        else if (line[i] == '#' && !quoted)
            return line.substr(0, i);
    }
    return line;
}

inline std::string unquote(std::string_view v, int line) {
    if (v.size() >= 2 && v.front() == '"' && v.back() == '"')
        return std::string(v.substr(1, v.size() - 2));
    if (!v.empty() && (v.front() == '"' || v.back() == '"'))
        throw ConfigError(line, "unterminated string " + std::string(v));
    return std::string(v);
}

inline bool parse_bool(std::string_view v, int line, std::string_view key) {
    if (v == "true")
        return true;
    if (v == "false")
        return false;
    throw ConfigError(line, std::string(key) + ": expected true or false, got '" + std::string(v) + "'");
}

inline long long parse_int(std::string_view v, int line, std::string_view key) {
    long long out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size())
        throw ConfigError(line, std::string(key) + ": expected an integer, got '" + std::string(v) + "'");
    return out;
}

inline double parse_real(std::string_view v, int line, std::string_view key) {
    try {
        std::size_t used = 0;
        double d = std::stod(std::string(v), &used);
        if (used != v.size())
            throw std::invalid_argument("trailing");
        return d;
    } catch (const std::exception&) {
        throw ConfigError(line, std::string(key) + ": expected a number, got '" + std::string(v) + "'");
    }
}

} // namespace detail

/// Parses "1s", "250ms", "10us", "5ns", "3ps" or a bare number of seconds.
inline SimTime parse_duration(std::string_view text) {
    text = detail::trim(text);
    struct Unit {
        std::string_view suffix;
        std::int64_t divisor;
    };
    static constexpr Unit units[] = {{"ms", 1'000}, {"us", 1'000'000}, {"ns", 1'000'000'000},
                                     {"ps", 1'000'000'000'000}, {"s", 1}};
    std::int64_t divisor = 1;
    for (const auto& u : units) {
        if (text.size() > u.suffix.size() && text.ends_with(u.suffix)) {
            text.remove_suffix(u.suffix.size());
            divisor = u.divisor;
            break;
        }
    }
    const SimTime value = SimTime::parse_decimal(detail::trim(text));
    return SimTime::from_ticks(value.ticks() / divisor);
}

inline std::string format_duration(SimTime t) { return t.to_string() + "s"; }

namespace detail {

inline SimTime duration_value(std::string_view v, int line, std::string_view key) {
    try {
        return parse_duration(v);
    } catch (const std::exception& e) {
        throw ConfigError(line, std::string(key) + ": bad duration '" + std::string(v) + "' (" + e.what() + ")");
    }
}

inline std::optional<int> parse_host_ref(std::string_view v) {
    if (!v.starts_with("host[") || !v.ends_with("]"))
        return std::nullopt;
    v.remove_prefix(5);
    v.remove_suffix(1);
    int idx = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), idx);
    if (ec != std::errc{} || ptr != v.data() + v.size() || idx < 0)
        return std::nullopt;
    return idx;
}

struct Assignment {
    int line = 0;
    std::string key;  // full key as written
    std::optional<int> host;  // nullopt: global / all hosts
    bool all_hosts = false;
    std::string scope;  // "mgmt", "ping", "medium", "global"
    int app = 0;
    std::string name;
    std::string value;
};

/// Splits "host[1]" style segment into index; "*" yields -1.
inline std::optional<int> bracket_index(std::string_view seg, std::string_view stem) {
    if (!seg.starts_with(stem) || seg.size() < stem.size() + 3 || seg[stem.size()] != '[' || seg.back() != ']')
        return std::nullopt;
    std::string_view inner = seg.substr(stem.size() + 1, seg.size() - stem.size() - 2);
    if (inner == "*")
        return -1;
    int idx = 0;
    auto [ptr, ec] = std::from_chars(inner.data(), inner.data() + inner.size(), idx);
    if (ec != std::errc{} || ptr != inner.data() + inner.size() || idx < 0)
        return std::nullopt;
    return idx;
}

inline std::vector<std::string_view> split_dots(std::string_view key) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    int depth = 0;
    for (std::size_t i = 0; i < key.size(); ++i) {
        if (key[i] == '[')
            ++depth;
        else if (key[i] == ']')
            --depth;
        else if (key[i] == '.' && depth == 0) {
            out.push_back(key.substr(start, i - start));
            start = i + 1;
        }
    }
    out.push_back(key.substr(start));
    return out;
}

} // namespace detail

/// Parses an INI-like scenario description using OMNeT++-style dotted keys,
/// e.g. `**.host[0].wlan[0].mgmt.WiFiDirectGO=true`.
inline ParseResult parse_config(std::string_view text, const ParseOptions& opts = {}) {
    using namespace detail;
    ParseResult result;
    std::vector<Assignment> assignments;
    std::optional<int> declared_hosts;
    int max_host = -1;

    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos)
            nl = text.size();
        std::string_view raw = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        std::string_view line = trim(strip_comment(raw));
        if (line.empty())
            continue;
        if (line.front() == '[' && line.back() == ']') {
            result.warnings.push_back("line " + std::to_string(line_no) + ": section header ignored");
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError(line_no, "expected key = value");
        std::string_view key = trim(line.substr(0, eq));
        std::string_view value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError(line_no, "empty key");

        std::string_view norm = key;
        while (norm.starts_with("**.") || norm.starts_with("*."))
            norm.remove_prefix(norm.front() == '*' && norm[1] == '*' ? 3 : 2);

        Assignment a;
        a.line = line_no;
        a.key = std::string(key);
        a.value = unquote(value, line_no);
        auto segs = split_dots(norm);

        auto unknown = [&] {
            result.warnings.push_back("line " + std::to_string(line_no) + ": unknown key '" + std::string(key) +
                                      "' ignored");
        };

        std::optional<int> host;
        if (!segs.empty()) {
            host = bracket_index(segs.front(), "host");
            if (host)
                segs.erase(segs.begin());
        }
        if (host) {
            if (*host == -1)
                a.all_hosts = true;
            else
                a.host = *host;
        } else {
            a.all_hosts = true;
        }

        if (segs.size() == 3 && bracket_index(segs[0], "wlan") && segs[1] == "mgmt") {
            a.scope = "mgmt";
            a.name = std::string(segs[2]);
        } else if (segs.size() == 2 && bracket_index(segs[0], "pingApp")) {
            const int app = *bracket_index(segs[0], "pingApp");
            if (app < 0 || a.all_hosts)
                throw ConfigError(line_no, "ping apps must name a concrete host and app index");
            a.scope = "ping";
            a.app = app;
            a.name = std::string(segs[1]);
        } else if (!host && segs.size() == 2 && (segs[0] == "radioMedium" || segs[0] == "medium")) {
            a.scope = "medium";
            a.name = std::string(segs[1]);
        } else if (!host && segs.size() == 1) {
            a.scope = "global";
            a.name = std::string(segs[0]);
        } else if (host && segs.size() == 1 && segs[0] == "numPingApps") {
            a.scope = "global";
            a.name = "numPingApps";
        } else {
            unknown();
            continue;
        }

        if (a.scope == "global" && a.name == "numHosts") {
            const long long n = parse_int(a.value, line_no, a.name);
            if (n < 0 || n > 65535)
                throw ConfigError(line_no, "numHosts out of range");
            declared_hosts = static_cast<int>(n);
            continue;
        }
        if (a.host)
            max_host = std::max(max_host, *a.host);
        assignments.push_back(std::move(a));
    }

    int host_count = declared_hosts.value_or(std::max(max_host + 1, opts.default_host_count));
    if (declared_hosts && max_host >= *declared_hosts) {
        for (const auto& a : assignments)
            if (a.host && *a.host >= *declared_hosts)
                throw ConfigError(a.line, "host[" + std::to_string(*a.host) + "] does not exist (numHosts=" +
                                              std::to_string(*declared_hosts) + ")");
    }

    ScenarioConfig& cfg = result.config;
    cfg = ScenarioConfig::with_hosts(host_count);

    auto apply_mgmt = [&](PeerConfig& p, const Assignment& a) {
        const int ln = a.line;
        const std::string& n = a.name;
        const std::string& v = a.value;
        if (n == "WiFiDirectUsed") p.wifi_direct_used = parse_bool(v, ln, n);
        else if (n == "WiFiDirectGO") p.autonomous_go = parse_bool(v, ln, n);
        else if (n == "strGroup") p.group_ssid = v;
        else if (n == "goIntent") p.go_intent = static_cast<int>(parse_int(v, ln, n));
        else if (n == "persistent") p.persistent = parse_bool(v, ln, n);
        else if (n == "provisioningFrames") p.provisioning_frames = static_cast<int>(parse_int(v, ln, n));
        else if (n == "beaconInterval") p.beacon_interval = duration_value(v, ln, n);
        else if (n == "beaconStart") p.beacon_start = duration_value(v, ln, n);
        else if (n == "startTime") p.start_time = duration_value(v, ln, n);
        else if (n == "scanDuration") p.scan_duration = duration_value(v, ln, n);
        else if (n == "searchProbeGap") p.search_probe_gap = duration_value(v, ln, n);
        else if (n == "scanProbeDelay") p.scan_probe_delay = duration_value(v, ln, n);
        else if (n == "responseTimeout") p.response_timeout = duration_value(v, ln, n);
        else if (n == "listenHold") p.listen_hold = duration_value(v, ln, n);
        else if (n == "socialChannelsOnly") p.social_channels_only = parse_bool(v, ln, n);
        else if (n == "restartAt") p.restart_at = duration_value(v, ln, n);
        else if (n == "listenDwell") {
            p.listen_dwell_choices.clear();
            std::string_view rest = v;
            while (!rest.empty()) {
                const std::size_t comma = rest.find(',');
                p.listen_dwell_choices.push_back(duration_value(rest.substr(0, comma), ln, n));
                if (comma == std::string_view::npos)
                    break;
                rest.remove_prefix(comma + 1);
            }
        } else if (n == "findMode") {
            if (v == "alternate") p.find_mode = FindMode::Alternate;
            else if (v == "listen") p.find_mode = FindMode::ListenOnly;
            else if (v == "search") p.find_mode = FindMode::SearchOnly;
            else throw ConfigError(ln, "findMode: expected alternate, listen or search");
        } else {
            return false;
        }
        return true;
    };

    struct PendingApp {
        PingAppConfig app;
        bool has_dest = false;
        int line = 0;
    };
    std::map<std::pair<int, int>, PendingApp> apps;

    auto pass = [&](bool specific) {
        for (const auto& a : assignments) {
            const bool is_specific = a.host.has_value();
            if (is_specific != specific)
                continue;
            if (a.scope == "mgmt") {
                bool known = true;
                if (a.host) {
                    known = apply_mgmt(cfg.hosts[static_cast<std::size_t>(*a.host)], a);
                } else {
                    for (auto& h : cfg.hosts)
                        known = apply_mgmt(h, a);
                    if (cfg.hosts.empty()) {
                        PeerConfig scratch;
                        known = apply_mgmt(scratch, a);
                    }
                }
                if (!known)
                    result.warnings.push_back("line " + std::to_string(a.line) + ": unknown key '" + a.key +
                                              "' ignored");
            } else if (a.scope == "ping") {
                auto& pa = apps[{*a.host, a.app}];
                pa.app.owner = DeviceAddress::for_host(static_cast<std::uint16_t>(*a.host));
                if (pa.line == 0)
                    pa.line = a.line;
                if (a.name == "destAddr") {
                    auto dest = parse_host_ref(a.value);
                    if (!dest)
                        throw ConfigError(a.line, "destAddr: expected host[i], got '" + a.value + "'");
                    if (*dest >= host_count)
                        throw ConfigError(a.line, "destAddr: " + a.value + " does not exist");
                    pa.app.dest = DeviceAddress::for_host(static_cast<std::uint16_t>(*dest));
                    pa.has_dest = true;
                } else if (a.name == "sendInterval") {
                    pa.app.send_interval = duration_value(a.value, a.line, a.name);
                } else if (a.name == "startTime") {
                    pa.app.start_offset = duration_value(a.value, a.line, a.name);
                } else if (a.name == "payloadPrefix") {
                    pa.app.payload_prefix = a.value;
                } else {
                    result.warnings.push_back("line " + std::to_string(a.line) + ": unknown key '" + a.key +
                                              "' ignored");
                }
            } else if (a.scope == "medium") {
                auto& m = cfg.medium;
                const int ln = a.line;
                const std::string& n = a.name;
                if (n == "frameAirtime") m.frame_airtime = duration_value(a.value, ln, n);
                else if (n == "ackTurnaround") m.ack_turnaround = duration_value(a.value, ln, n);
                else if (n == "ackTimeout") m.ack_timeout = duration_value(a.value, ln, n);
                else if (n == "lossProbability") m.loss_probability = parse_real(a.value, ln, n);
                else if (n == "maxRetries") m.max_retries = static_cast<int>(parse_int(a.value, ln, n));
                else if (n == "channelCount") m.channel_count = static_cast<int>(parse_int(a.value, ln, n));
                else result.warnings.push_back("line " + std::to_string(ln) + ": unknown key '" + a.key + "' ignored");
            } else if (a.scope == "global") {
                if (a.name == "seed" || a.name == "seed-set") {
                    const long long s = parse_int(a.value, a.line, a.name);
                    cfg.seed = static_cast<std::uint64_t>(s);
                } else if (a.name == "sim-time-limit") {
                    cfg.horizon = duration_value(a.value, a.line, a.name);
                } else {
                    result.warnings.push_back("line " + std::to_string(a.line) + ": key '" + a.key +
                                              "' has no effect here, ignored");
                }
            }
        }
    };
    pass(false);
    pass(true);

    for (auto& [key, pa] : apps) {
        if (!pa.has_dest)
            throw ConfigError(pa.line, "host[" + std::to_string(key.first) + "].pingApp[" +
                                           std::to_string(key.second) + "] has no destAddr");
        try {
            pa.app.validate();
        } catch (const std::exception& e) {
            throw ConfigError(pa.line, e.what());
        }
        cfg.ping_apps.push_back(pa.app);
    }

    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(0, e.what());
    }
    return result;
}

/// Writes a config that parse_config reads back to an equal ScenarioConfig.
inline std::string serialize_config(const ScenarioConfig& cfg) {
    std::ostringstream out;
    auto b = [](bool v) { return v ? "true" : "false"; };
    out << "numHosts = " << cfg.host_count << "\n";
    out << "seed = " << cfg.seed << "\n";
    out << "sim-time-limit = " << format_duration(cfg.horizon) << "\n";
    const auto& m = cfg.medium;
    char real[40];
    std::snprintf(real, sizeof real, "%.17g", m.loss_probability);
    out << "**.radioMedium.frameAirtime = " << format_duration(m.frame_airtime) << "\n"
        << "**.radioMedium.ackTurnaround = " << format_duration(m.ack_turnaround) << "\n"
        << "**.radioMedium.ackTimeout = " << format_duration(m.ack_timeout) << "\n"
        << "**.radioMedium.lossProbability = " << real << "\n"
        << "**.radioMedium.maxRetries = " << m.max_retries << "\n"
        << "**.radioMedium.channelCount = " << m.channel_count << "\n";
    for (int i = 0; i < cfg.host_count; ++i) {
        const PeerConfig& p = cfg.hosts[static_cast<std::size_t>(i)];
        const std::string k = "**.host[" + std::to_string(i) + "].wlan[0].mgmt.";
        out << k << "WiFiDirectUsed = " << b(p.wifi_direct_used) << "\n"
            << k << "WiFiDirectGO = " << b(p.autonomous_go) << "\n"
            << k << "strGroup = \"" << p.group_ssid << "\"\n"
            << k << "goIntent = " << p.go_intent << "\n"
            << k << "persistent = " << b(p.persistent) << "\n"
            << k << "provisioningFrames = " << p.provisioning_frames << "\n"
            << k << "beaconInterval = " << format_duration(p.beacon_interval) << "\n"
            << k << "beaconStart = " << format_duration(p.beacon_start) << "\n"
            << k << "startTime = " << format_duration(p.start_time) << "\n"
            << k << "scanDuration = " << format_duration(p.scan_duration) << "\n"
            << k << "searchProbeGap = " << format_duration(p.search_probe_gap) << "\n"
            << k << "scanProbeDelay = " << format_duration(p.scan_probe_delay) << "\n"
            << k << "responseTimeout = " << format_duration(p.response_timeout) << "\n"
            << k << "listenHold = " << format_duration(p.listen_hold) << "\n"
            << k << "socialChannelsOnly = " << b(p.social_channels_only) << "\n";
        out << k << "listenDwell = \"";
        for (std::size_t j = 0; j < p.listen_dwell_choices.size(); ++j)
            out << (j ? "," : "") << format_duration(p.listen_dwell_choices[j]);
        out << "\"\n";
        out << k << "findMode = "
            << (p.find_mode == FindMode::Alternate ? "alternate"
                                                   : p.find_mode == FindMode::ListenOnly ? "listen" : "search")
            << "\n";
        if (p.restart_at)
            out << k << "restartAt = " << format_duration(*p.restart_at) << "\n";
    }
    std::map<int, int> next_app;
    for (const auto& app : cfg.ping_apps) {
        const int owner = app.owner.host_index();
        const int j = next_app[owner]++;
        const std::string k = "*.host[" + std::to_string(owner) + "].pingApp[" + std::to_string(j) + "].";
        out << k << "destAddr = \"" << host_name(app.dest) << "\"\n"
            << k << "sendInterval = " << format_duration(app.send_interval) << "\n"
            << k << "startTime = " << format_duration(app.start_offset) << "\n"
            << k << "payloadPrefix = \"" << app.payload_prefix << "\"\n";
    }
    return out.str();
}

} // namespace wfd
