#pragma once

#include "wfdsim/wfdsim.hpp"

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace wfdtest {

inline std::string read_scenario(const std::string& name) {
    std::ifstream in(std::string(WFDSIM_SCENARIO_DIR) + "/" + name, std::ios::binary);
    if (!in)
        throw std::runtime_error("missing scenario " + name);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline wfd::ScenarioConfig load_scenario(const std::string& name) {
    return wfd::parse_config(read_scenario(name)).config;
}

inline wfd::DeviceAddress host(int i) { return wfd::DeviceAddress::for_host(static_cast<std::uint16_t>(i)); }

/// Frames of a finished run, one entry per transmission, in firing order.
inline std::vector<const wfd::FrameRecord*> frames_of(const wfd::Scenario& s, wfd::FrameKind kind) {
    std::vector<const wfd::FrameRecord*> out;
    for (const auto& f : s.frames())
        if (f.frame.kind == kind)
            out.push_back(&f);
    return out;
}

} // namespace wfdtest
