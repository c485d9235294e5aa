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

#include "sipflow/experiments.hpp"

#include <algorithm>
#include <future>

#include "sipflow/policy.hpp"
#include "sipflow/simulation.hpp"

namespace sipflow {

ScenarioConfig scaled_for_n(const ScenarioConfig& base, std::uint32_t n)
{
    if (n < 1)
        throw ConfigError("n values must be >= 1");
    ScenarioConfig cfg = base;
    cfg.n_user_agents = n;
    const std::uint64_t scaled = std::uint64_t{base.total_requests} * n / base.n_user_agents;
    cfg.total_requests = static_cast<std::uint32_t>(std::max<std::uint64_t>(scaled, 1));
    return cfg;
}

std::vector<std::pair<std::uint32_t, MetricsReport>> sweep_n(const ScenarioConfig& base,
                                                             std::span<const std::uint32_t> n_values)
{
    if (n_values.empty())
        throw ConfigError("sweep needs at least one n value");
    base.validate();

    std::vector<ScenarioConfig> configs;
    for (std::uint32_t n : n_values) {
        configs.push_back(scaled_for_n(base, n));
        configs.back().validate();
    }

    std::vector<std::future<MetricsReport>> runs;
    for (const ScenarioConfig& cfg : configs)
        runs.push_back(std::async(std::launch::async, [cfg] { return run_scenario(cfg); }));

    std::vector<std::pair<std::uint32_t, MetricsReport>> out;
    for (std::size_t i = 0; i < runs.size(); ++i)
        out.emplace_back(n_values[i], runs[i].get());
    return out;
}

ComparisonTable compare_policies(const ScenarioConfig& config, std::span<const std::string> policies,
                                 std::uint64_t seed)
{
    std::vector<ScenarioConfig> configs;
    for (const std::string& name : policies) {
        if (!is_policy_name(name))
            throw ConfigError("unknown policy '" + name + "'");
        ScenarioConfig cfg = config;
        cfg.policy_name = name;
        cfg.seed = seed;
        cfg.validate();
        configs.push_back(std::move(cfg));
    }

    std::vector<std::future<MetricsReport>> runs;
    for (const ScenarioConfig& cfg : configs)
        runs.push_back(std::async(std::launch::async, [cfg] { return run_scenario(cfg); }));

    std::vector<MetricsReport> reports;
    for (auto& r : runs)
        reports.push_back(r.get());
    return make_comparison(std::move(reports));
}

} // namespace sipflow
