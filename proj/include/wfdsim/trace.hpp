#pragma once

#include "wfdsim/sim_time.hpp"

#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace wfd {

/// One delivered-frame observation: `#<id>\t<time>\t<src> --> <dst>\t<name>`.
struct TraceRecord {
    std::uint64_t event_id = 0;
    SimTime time;
    std::string src;
    std::string dst;
    std::string frame_name;
    bool operator==(const TraceRecord&) const = default;
};

inline std::string format_trace_line(const TraceRecord& r) {
    return "#" + std::to_string(r.event_id) + "\t" + r.time.to_string() + "\t" + r.src + " --> " + r.dst + "\t" +
           r.frame_name;
}

inline void write_trace(const TraceRecord& r, std::ostream& sink) { sink << format_trace_line(r) << '\n'; }

class TraceParseError : public std::runtime_error {
public:
    TraceParseError(std::size_t line, const std::string& what)
        : std::runtime_error("trace line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

inline TraceRecord parse_trace_line(std::string_view line, std::size_t line_no = 0) {
    auto fail = [&](const char* why) { throw TraceParseError(line_no, why); };
    if (line.empty() || line.front() != '#')
        fail("expected '#<id>'");
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string_view::npos ? t1 : line.find('\t', t1 + 1);
    const auto t3 = t2 == std::string_view::npos ? t2 : line.find('\t', t2 + 1);
    if (t3 == std::string_view::npos)
        fail("expected four tab-separated fields");
    TraceRecord r;
    const std::string_view id = line.substr(1, t1 - 1);
    if (id.empty())
        fail("empty event id");
    for (char c : id) {
        if (c < '0' || c > '9')
            fail("event id is not a number");
        r.event_id = r.event_id * 10 + static_cast<std::uint64_t>(c - '0');
    }
    try {
        r.time = SimTime::parse_decimal(line.substr(t1 + 1, t2 - t1 - 1));
    } catch (const std::exception&) {
        fail("bad timestamp");
    }
    const std::string_view hop = line.substr(t2 + 1, t3 - t2 - 1);
    const auto arrow = hop.find(" --> ");
    if (arrow == std::string_view::npos)
        fail("expected '<src> --> <dst>'");
    r.src = std::string(hop.substr(0, arrow));
    r.dst = std::string(hop.substr(arrow + 5));
    r.frame_name = std::string(line.substr(t3 + 1));
    if (r.src.empty() || r.dst.empty() || r.frame_name.empty())
        fail("empty field");
    return r;
}

inline std::vector<TraceRecord> read_trace(std::istream& in) {
    std::vector<TraceRecord> out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        out.push_back(parse_trace_line(line, n));
    }
    return out;
}

inline std::string to_trace_text(const std::vector<TraceRecord>& records) {
    std::ostringstream out;
    for (const auto& r : records)
        write_trace(r, out);
    return out.str();
}

} // namespace wfd
