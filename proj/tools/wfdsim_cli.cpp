// Command-line runner: run one scenario, sweep seeds, or validate a trace.

#include "wfdsim/wfdsim.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + path);
    out << text;
}

wfd::ScenarioConfig load_config(const std::string& path) {
    auto parsed = wfd::parse_config(read_file(path));
    for (const auto& w : parsed.warnings)
        std::cerr << path << ": warning: " << w << "\n";
    return parsed.config;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Wi-Fi Direct group formation simulator"};
    app.require_subcommand(1);

    std::string config_path, trace_path, metrics_path, metrics_json_path, until;
    std::optional<std::uint64_t> seed;
    auto* run = app.add_subcommand("run", "run one scenario");
    run->add_option("--config", config_path, "scenario file")->required();
    run->add_option("--seed", seed, "override the scenario seed");
    run->add_option("--until", until, "override the horizon, e.g. 20s");
    run->add_option("--trace", trace_path, "trace output path");
    run->add_option("--metrics", metrics_path, "flat metrics output path");
    run->add_option("--metrics-json", metrics_json_path, "structured metrics output path");

    std::size_t seeds = 100;
    unsigned jobs = 1;
    std::string sweep_until;
    std::optional<std::uint64_t> first_seed;
    auto* sweep = app.add_subcommand("sweep", "run consecutive seeds and aggregate discovery times");
    sweep->add_option("--config", config_path, "scenario file")->required();
    sweep->add_option("--seeds", seeds, "number of runs")->check(CLI::PositiveNumber);
    sweep->add_option("--seed", first_seed, "first seed (default: the scenario seed)");
    sweep->add_option("--until", sweep_until, "override the horizon");
    sweep->add_option("--jobs", jobs, "parallel runs (0 = hardware threads)");

    wfd::ValidateOptions vopt;
    std::string ack_timeout;
    auto* validate = app.add_subcommand("validate", "check a trace against the protocol invariants");
    validate->add_option("--trace", trace_path, "trace file")->required();
    validate->add_option("--ack-timeout", ack_timeout, "ACK timeout used by the pairing check");
    validate->add_option("--max-retries", vopt.max_retries, "retry limit used by the pairing check");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            wfd::ScenarioConfig cfg = load_config(config_path);
            if (seed)
                cfg.seed = *seed;
            if (!until.empty())
                cfg.horizon = wfd::parse_duration(until);
            wfd::Scenario scenario(cfg);
            scenario.run();
            const wfd::MetricsReport m = scenario.metrics();
            if (!trace_path.empty())
                write_file(trace_path, scenario.trace_text());
            if (!metrics_path.empty())
                write_file(metrics_path, m.to_flat());
            if (!metrics_json_path.empty())
                write_file(metrics_json_path, m.to_json().dump(2) + "\n");
            if (trace_path.empty() && metrics_path.empty() && metrics_json_path.empty())
                std::cout << m.to_flat();
            return 0;
        }
        if (*sweep) {
            wfd::ScenarioConfig cfg = load_config(config_path);
            if (!sweep_until.empty())
                cfg.horizon = wfd::parse_duration(sweep_until);
            if (jobs == 0)
                jobs = std::max(1u, std::thread::hardware_concurrency());
            const auto t0 = std::chrono::steady_clock::now();
            const wfd::SweepReport rep = wfd::run_sweep(cfg, seeds, first_seed.value_or(cfg.seed), jobs);
            const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            std::cout << rep.to_text();
            std::cerr << "wall_clock_seconds = " << secs << "\n";
            return 0;
        }
        if (*validate) {
            if (!ack_timeout.empty())
                vopt.ack_timeout = wfd::parse_duration(ack_timeout);
            const auto violations = wfd::validate_trace(read_file(trace_path), vopt);
            for (const auto& v : violations)
                std::cerr << v.to_string() << "\n";
            if (!violations.empty()) {
                std::cerr << violations.size() << " violation(s)\n";
                return 1;
            }
            std::cout << "trace ok\n";
            return 0;
        }
    } catch (const wfd::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
