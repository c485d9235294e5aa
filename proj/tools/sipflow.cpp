/*
 * Copyright 2026 The sipflow Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// sipflow: run the SDN SIP load-balancing testbed from the command line.
//
//   sipflow run     --scenario <path> --policy <name> --seed <u64> [--out <path>]
//                   [--format json|csv] [--series] [--dump-flows]
//   sipflow compare --scenario <path> --seed <u64> [--out <path>] [--format json|csv]
//   sipflow sweep   --scenario <path> --policy <name> --n <comma-list> --seed <u64>
//                   [--out <path>] [--format json|csv]
//
// Exit codes: 0 success, 1 configuration error, 2 I/O error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "sipflow/experiments.hpp"
#include "sipflow/metrics.hpp"
#include "sipflow/policy.hpp"
#include "sipflow/scenario.hpp"
#include "sipflow/simulation.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitIo = 2;

void setup_logging()
{
    auto logger = spdlog::stderr_logger_mt("sipflow");
    logger->set_pattern("%^[%l]%$ %v");
    spdlog::set_default_logger(logger);

    const char* env = std::getenv("SIPFLOW_LOG");
    const std::string level = env ? env : "error";
    if (level == "error")
        spdlog::set_level(spdlog::level::err);
    else if (level == "info")
        spdlog::set_level(spdlog::level::info);
    else if (level == "debug")
        spdlog::set_level(spdlog::level::debug);
    else
        throw sipflow::ConfigError("SIPFLOW_LOG must be error, info or debug (got '" + level + "')");
}

std::vector<std::uint32_t> parse_n_list(const std::string& text)
{
    std::vector<std::uint32_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            const unsigned long v = std::stoul(item, &used);
            if (used != item.size() || v < 1 || v > UINT32_MAX)
                throw std::invalid_argument(item);
            out.push_back(static_cast<std::uint32_t>(v));
        } catch (const std::logic_error&) {
            throw sipflow::ConfigError("--n expects a comma-separated list of positive integers, got '" +
                                       text + "'");
        }
    }
    if (out.empty())
        throw sipflow::ConfigError("--n needs at least one value");
    return out;
}

std::filesystem::path series_path(const std::filesystem::path& out)
{
    std::filesystem::path p = out;
    p.replace_extension(".series.csv");
    return p;
}

struct Options {
    std::string scenario;
    std::string policy;
    std::uint64_t seed = 0;
    std::string out;
    std::string format = "json";
    std::string n_list;
    bool series = false;
    bool dump_flows = false;
};

int cmd_run(const Options& opt)
{
    sipflow::ScenarioConfig cfg = sipflow::load_scenario(opt.scenario);
    cfg.policy_name = opt.policy;
    cfg.seed = opt.seed;
    const auto format = sipflow::parse_report_format(opt.format);
    if (opt.series && opt.out.empty())
        throw sipflow::ConfigError("--series writes <out>.series.csv and needs --out");

    sipflow::Simulation sim(cfg);
    sim.run();
    const sipflow::MetricsReport report = sim.report();
    spdlog::info("{} / {}: avg response {} ms, throughput {} rps, {} failed", report.scenario_name,
                 report.policy_name, report.avg_response_time_ms, report.throughput_rps, report.failed_count);

    sipflow::emit_report(std::span(&report, 1), format, opt.out, std::cout);

    if (opt.series) {
        const auto path = series_path(opt.out);
        std::ofstream f(path, std::ios::trunc);
        if (!f)
            throw sipflow::IoError("cannot open '" + path.string() + "' for writing");
        sipflow::write_series_csv(f, report);
        if (!f)
            throw sipflow::IoError("write to '" + path.string() + "' failed");
    }
    if (opt.dump_flows)
        sim.flow_switch().dump_flows(opt.out.empty() ? std::cerr : std::cout);
    return kExitOk;
}

int cmd_compare(const Options& opt)
{
    const sipflow::ScenarioConfig cfg = sipflow::load_scenario(opt.scenario);
    const auto format = sipflow::parse_report_format(opt.format);
    const std::vector<std::string> policies{std::string(sipflow::kRandomPolicyName),
                                            std::string(sipflow::kRoundRobinPolicyName),
                                            std::string(sipflow::kLeastRequestPolicyName)};
    const sipflow::ComparisonTable table = sipflow::compare_policies(cfg, policies, opt.seed);
    for (const auto& r : table.reports)
        spdlog::info("{} / {}: avg response {} ms, throughput {} rps", r.scenario_name, r.policy_name,
                     r.avg_response_time_ms, r.throughput_rps);
    sipflow::emit_comparison(table, format, opt.out, std::cout);
    return kExitOk;
}

int cmd_sweep(const Options& opt)
{
    sipflow::ScenarioConfig cfg = sipflow::load_scenario(opt.scenario);
    cfg.policy_name = opt.policy;
    cfg.seed = opt.seed;
    const auto format = sipflow::parse_report_format(opt.format);
    const std::vector<std::uint32_t> ns = parse_n_list(opt.n_list);

    std::vector<sipflow::MetricsReport> reports;
    for (auto& [n, report] : sipflow::sweep_n(cfg, ns)) {
        spdlog::info("n={}: avg response {} ms, throughput {} rps", n, report.avg_response_time_ms,
                     report.throughput_rps);
        reports.push_back(std::move(report));
    }
    sipflow::emit_report(reports, format, opt.out, std::cout);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"SDN-based SIP server load-balancing testbed"};
    app.require_subcommand(1);

    Options opt;

    auto* run = app.add_subcommand("run", "Run one scenario under one policy");
    run->add_option("--scenario", opt.scenario, "Scenario JSON file")->required();
    run->add_option("--policy", opt.policy, "random | round-robin | least-request")->required();
    run->add_option("--seed", opt.seed, "Random seed")->required();
    run->add_option("--out", opt.out, "Output file (default: stdout)");
    run->add_option("--format", opt.format, "json | csv");
    run->add_flag("--series", opt.series, "Also write <out>.series.csv (sent_at_ms,response_time_ms)");
    run->add_flag("--dump-flows", opt.dump_flows, "Print the final flow table");

    auto* compare = app.add_subcommand("compare", "Run all three policies on a paired workload");
    compare->add_option("--scenario", opt.scenario, "Scenario JSON file")->required();
    compare->add_option("--seed", opt.seed, "Random seed")->required();
    compare->add_option("--out", opt.out, "Output file (default: stdout)");
    compare->add_option("--format", opt.format, "json | csv");

    auto* sweep = app.add_subcommand("sweep", "Vary the number of user agents");
    sweep->add_option("--scenario", opt.scenario, "Scenario JSON file")->required();
    sweep->add_option("--policy", opt.policy, "random | round-robin | least-request")->required();
    sweep->add_option("--n", opt.n_list, "Comma-separated user-agent counts")->required();
    sweep->add_option("--seed", opt.seed, "Random seed")->required();
    sweep->add_option("--out", opt.out, "Output file (default: stdout)");
    sweep->add_option("--format", opt.format, "json | csv");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        setup_logging();
        if (run->parsed())
            return cmd_run(opt);
        if (compare->parsed())
            return cmd_compare(opt);
        return cmd_sweep(opt);
    } catch (const sipflow::IoError& e) {
        std::cerr << "sipflow: " << e.what() << '\n';
        return kExitIo;
    } catch (const sipflow::ConfigError& e) {
        std::cerr << "sipflow: " << e.what() << '\n';
        return kExitConfig;
    }
}
