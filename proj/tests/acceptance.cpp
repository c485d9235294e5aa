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

// Acceptance suite. Prints one PASS/FAIL line per criterion (and per clause
// where a criterion has several) and exits non-zero if any line failed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "sipflow/experiments.hpp"
#include "sipflow/metrics.hpp"
#include "sipflow/policy.hpp"
#include "sipflow/scenario.hpp"
#include "sipflow/server_model.hpp"
#include "sipflow/simulation.hpp"

using namespace sipflow;

namespace {

const std::vector<std::string> kPolicies{"random", "round-robin", "least-request"};
constexpr std::uint64_t kSeeds[] = {1, 2, 3, 4, 5};

int g_failures = 0;

void report(const std::string& id, bool ok, const std::string& detail)
{
    fmt::print("{} {} {}\n", id, ok ? "PASS" : "FAIL", detail);
    std::fflush(stdout);
    if (!ok)
        ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ScenarioConfig scenario(int index)
{
    ScenarioConfig cfg = bundled_scenario(index);
    cfg.name = "scenario" + std::to_string(index);
    return cfg;
}

double rel_diff(double a, double b)
{
    return std::abs(a - b) / std::min(a, b);
}

void a1_parity()
{
    const auto t0 = std::chrono::steady_clock::now();
    double sum = 0;
    for (std::uint64_t seed : kSeeds) {
        const ComparisonTable t = compare_policies(scenario(1), kPolicies, seed);
        double worst = 0;
        for (const auto& a : t.reports)
            for (const auto& b : t.reports)
                worst = std::max(worst, rel_diff(a.avg_response_time_ms, b.avg_response_time_ms));
        sum += worst;
    }
    const double mean = sum / std::size(kSeeds);
    const double secs = seconds_since(t0);
    report("A1", mean <= 0.10 && secs < 5,
           fmt::format("scenario 1 mean max pairwise avg-response gap {:.4f} (limit 0.10), {:.2f}s", mean, secs));
}

void a2_dominance()
{
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    std::string worst;
    for (int sc : {2, 3})
        for (std::uint64_t seed : kSeeds) {
            const ComparisonTable t = compare_policies(scenario(sc), kPolicies, seed);
            if (!t.least_request_best_response_time.value_or(false) ||
                !t.least_request_best_throughput.value_or(false)) {
                ok = false;
                worst += fmt::format(" [scenario {} seed {}]", sc, seed);
            }
        }
    const double secs = seconds_since(t0);
    report("A2", ok && secs < 10,
           fmt::format("least-request strictly best on response time and throughput in scenarios 2-3, "
                       "5 seeds{}, {:.2f}s",
                       worst.empty() ? "" : "; failed on" + worst, secs));
}

void a3_first_assignment()
{
    const auto t0 = std::chrono::steady_clock::now();
    ScenarioConfig cfg = scenario(3);
    cfg.policy_name = "least-request";
    Simulation sim(cfg);
    sim.run();
    const auto first = sim.calls().front().server_id;
    const double secs = seconds_since(t0);
    report("A3", first == ServerId(3) && secs < 1,
           fmt::format("first scenario-3 request assigned to server {}, {:.3f}s",
                       first ? std::to_string(first->value) : "none", secs));
}

void a4_sweep()
{
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<std::uint32_t> ns{10, 20, 40, 80};

    // policy -> per-n seed-averaged (avg response, throughput)
    std::map<std::string, std::vector<std::pair<double, double>>> curves;
    for (const std::string& p : kPolicies) {
        std::vector<std::pair<double, double>> acc(ns.size(), {0.0, 0.0});
        for (std::uint64_t seed : kSeeds) {
            ScenarioConfig base = scenario(2);
            base.policy_name = p;
            base.seed = seed;
            const auto swept = sweep_n(base, ns);
            for (std::size_t i = 0; i < ns.size(); ++i) {
                acc[i].first += swept[i].second.avg_response_time_ms / std::size(kSeeds);
                acc[i].second += swept[i].second.throughput_rps / std::size(kSeeds);
            }
        }
        curves[p] = acc;
    }
    const double secs = seconds_since(t0);

    auto series = [&](auto pick) {
        std::string out;
        for (const std::string& p : kPolicies) {
            out += " " + p + "=[";
            for (std::size_t i = 0; i < ns.size(); ++i)
                out += fmt::format("{}{:.2f}", i ? "," : "", pick(curves[p][i]));
            out += "]";
        }
        return out;
    };

    bool rt_ok = true;
    bool tp_ok = true;
    for (const auto& [p, c] : curves)
        for (std::size_t i = 1; i < c.size(); ++i) {
            rt_ok = rt_ok && c[i].first >= c[i - 1].first;
            tp_ok = tp_ok && c[i].second <= c[i - 1].second;
        }
    report("A4.response", rt_ok && secs < 30,
           "avg response non-decreasing in n (ms):" + series([](auto v) { return v.first; }));
    report("A4.throughput", tp_ok && secs < 30,
           "throughput non-increasing in n (rps):" + series([](auto v) { return v.second; }));

    std::map<std::string, double> growth;
    for (const auto& [p, c] : curves)
        growth[p] = c.back().first / c.front().first - 1.0;
    const bool lr_smallest = growth["least-request"] < growth["random"] &&
                             growth["least-request"] < growth["round-robin"];
    report("A4.slope", lr_smallest && secs < 30,
           fmt::format("relative avg-response increase n=10->80 smallest for least-request: random={:.4f} "
                       "round-robin={:.4f} least-request={:.4f}, {:.2f}s",
                       growth["random"], growth["round-robin"], growth["least-request"], secs));
}

// Runs every (scenario, policy, seed, arrival process) and hands the finished
// simulation to `check`.
void for_each_run(const std::vector<std::string>& policies, const std::function<void(const Simulation&)>& check)
{
    for (int sc = 1; sc <= 3; ++sc)
        for (const std::string& p : policies)
            for (std::uint64_t seed : kSeeds)
                for (ArrivalProcess arrivals : {ArrivalProcess::Uniform, ArrivalProcess::Poisson}) {
                    ScenarioConfig cfg = scenario(sc);
                    cfg.policy_name = p;
                    cfg.seed = seed;
                    cfg.arrival_process = arrivals;
                    Simulation sim(cfg);
                    sim.run();
                    check(sim);
                }
}

void a5_rotation()
{
    int runs = 0;
    std::uint64_t worst = 0;
    for_each_run({"round-robin"}, [&](const Simulation& sim) {
        ++runs;
        const MetricsReport r = sim.report();
        auto [lo, hi] = std::minmax_element(r.per_server_assignments.begin(), r.per_server_assignments.end(),
                                            [](const auto& a, const auto& b) { return a.second < b.second; });
        worst = std::max(worst, hi->second - lo->second);
    });
    report("A5", worst <= 1, fmt::format("round-robin max per-server spread {} over {} runs", worst, runs));
}

void a6_determinism()
{
    int runs = 0;
    int differing = 0;
    for (int sc = 1; sc <= 3; ++sc)
        for (const std::string& p : kPolicies)
            for (std::uint64_t seed : kSeeds) {
                ScenarioConfig cfg = scenario(sc);
                cfg.policy_name = p;
                cfg.seed = seed;
                cfg.arrival_process = seed % 2 ? ArrivalProcess::Poisson : ArrivalProcess::Uniform;
                const MetricsReport a = run_scenario(cfg);
                const MetricsReport b = run_scenario(cfg);
                ++runs;
                if (to_json_text(std::span(&a, 1)) != to_json_text(std::span(&b, 1)))
                    ++differing;
            }
    report("A6", differing == 0, fmt::format("{} of {} repeated runs produced different JSON", differing, runs));
}

void a7_fifo_oracle()
{
    std::mt19937_64 rng(7);
    int mismatches = 0;
    std::size_t jobs = 0;
    for (int script = 0; script < 100; ++script) {
        const SimTime service = static_cast<SimTime>(1 + rng() % 100);
        std::vector<SimTime> arrivals(1 + rng() % 60);
        for (SimTime& a : arrivals)
            a = static_cast<SimTime>(rng() % 3000);
        std::sort(arrivals.begin(), arrivals.end());

        // Event-driven run through the simulator's queue and server model.
        ServerModel server(ServerId(1), service);
        EventQueue events;
        for (std::uint32_t i = 0; i < arrivals.size(); ++i)
            events.push(arrivals[i], UaSendRequest{i});
        std::vector<SimTime> simulated;
        while (!events.empty()) {
            const SimEvent e = events.pop();
            if (std::holds_alternative<UaSendRequest>(e.kind)) {
                events.push(server.accept(ServerJob{}, e.at), ServerJobComplete{0});
            } else {
                server.complete(e.at);
                simulated.push_back(e.at);
            }
        }

        // Closed form.
        std::vector<SimTime> expected;
        SimTime c = 0;
        for (SimTime a : arrivals) {
            c = std::max(c, a) + service;
            expected.push_back(c);
        }
        jobs += arrivals.size();
        if (simulated != expected)
            ++mismatches;
    }
    report("A7", mismatches == 0,
           fmt::format("FIFO completions match c_i = max(c_(i-1), a_i) + S in {} of 100 scripts ({} jobs)",
                       100 - mismatches, jobs));
}

void a8_conservation()
{
    int runs = 0;
    int bad = 0;
    for_each_run(kPolicies, [&](const Simulation& sim) {
        ++runs;
        std::uint64_t counted = 0;
        for (const RuleCounters& c : sim.flow_switch().read_counters())
            counted += c.packet_counter;
        bool ok = counted == sim.stats().rule_hit_packets && sim.stats().load_mismatches == 0;
        const auto in_flight =
            sim.controller().server_manager().in_flight(sim.flow_switch(), sim.controller().flow_manager());
        for (const auto& [id, n] : in_flight)
            ok = ok && n == 0;
        ok = ok && in_flight.size() == sim.servers().size();
        if (!ok)
            ++bad;
    });
    report("A8", bad == 0,
           fmt::format("counter sum == rule-hit packets and in_flight drained to 0 in {} of {} runs", runs - bad,
                       runs));
}

void a9_affinity()
{
    int runs = 0;
    std::size_t calls = 0;
    std::size_t split = 0;
    for_each_run(kPolicies, [&](const Simulation& sim) {
        ++runs;
        for (std::size_t i = 0; i < sim.traces().size(); ++i) {
            const CallTrace& t = sim.traces()[i];
            ++calls;
            const bool single = !t.servers_seen.empty() &&
                                std::all_of(t.servers_seen.begin(), t.servers_seen.end(),
                                            [&](ServerId s) { return s == t.servers_seen.front(); }) &&
                                sim.calls()[i].server_id == t.servers_seen.front();
            if (!single)
                ++split;
        }
    });
    report("A9", split == 0,
           fmt::format("{} of {} calls over {} runs stayed on one server", calls - split, calls, runs));
}

void a10_argmin()
{
    std::mt19937_64 rng(10);
    int mismatches = 0;
    for (int i = 0; i < 10000; ++i) {
        LoadSnapshot snap;
        const std::uint32_t servers = 1 + static_cast<std::uint32_t>(rng() % 10);
        const std::int64_t span = 1 + static_cast<std::int64_t>(rng() % 300);
        for (std::uint32_t s = 1; s <= servers; ++s)
            snap.per_server[ServerId(s)] = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(span));

        std::optional<ServerId> want;
        std::int64_t best = 0;
        for (const auto& [id, load] : snap.per_server)
            if (!want || load < best || (load == best && id < *want)) {
                want = id;
                best = load;
            }
        if (select_server_least_request(snap) != *want)
            ++mismatches;
    }
    report("A10", mismatches == 0,
           fmt::format("least-request equals brute-force argmin on {} of 10000 snapshots", 10000 - mismatches));
}

} // namespace

int main()
{
    a1_parity();
    a2_dominance();
    a3_first_assignment();
    a4_sweep();
    a5_rotation();
    a6_determinism();
    a7_fifo_oracle();
    a8_conservation();
    a9_affinity();
    a10_argmin();
    fmt::print("{} failing\n", g_failures);
    return g_failures == 0 ? 0 : 1;
}
