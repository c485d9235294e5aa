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

#include "sipflow/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "sipflow/policy.hpp"

namespace sipflow {

namespace {

// Highest per-UA call count that still fits the ephemeral source-port range.
constexpr std::uint32_t kMaxCallsPerUa = 65535 - 10000 + 1;

template <class T>
T get_field(const nlohmann::json& value, std::string_view key)
{
    try {
        return value.get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError("scenario key '" + std::string(key) + "' has the wrong type");
    }
}

std::uint64_t get_unsigned(const nlohmann::json& value, std::string_view key)
{
    if (!value.is_number_unsigned())
        throw ConfigError("scenario key '" + std::string(key) + "' must be a non-negative integer");
    return value.get<std::uint64_t>();
}

std::uint32_t get_u32(const nlohmann::json& value, std::string_view key)
{
    const std::uint64_t v = get_unsigned(value, key);
    if (v > UINT32_MAX)
        throw ConfigError("scenario key '" + std::string(key) + "' is out of range");
    return static_cast<std::uint32_t>(v);
}

} // namespace

std::string_view to_string(ArrivalProcess p)
{
    return p == ArrivalProcess::Uniform ? "uniform" : "poisson";
}

std::string_view to_string(BackgroundMode m)
{
    return m == BackgroundMode::Persistent ? "persistent" : "initial";
}

void ScenarioConfig::validate() const
{
    if (n_user_agents < 1)
        throw ConfigError("n_user_agents must be >= 1");
    if (total_requests < 1)
        throw ConfigError("total_requests must be >= 1");
    if (duration_ms < 1)
        throw ConfigError("duration_ms must be >= 1");
    if (service_time_ms < 1)
        throw ConfigError("service_time_ms must be >= 1");
    if (background_jobs.empty())
        throw ConfigError("background_jobs needs one entry per server");
    if (!is_policy_name(policy_name))
        throw ConfigError("unknown policy_name '" + policy_name + "'");
    if ((total_requests + n_user_agents - 1) / n_user_agents > kMaxCallsPerUa)
        throw ConfigError("too many requests per user agent for the source-port range");
}

ScenarioConfig parse_scenario_json(std::string_view text, std::string name)
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("scenario is not valid JSON: ") + e.what());
    }
    if (!doc.is_object())
        throw ConfigError("scenario must be a JSON object");

    ScenarioConfig cfg;
    cfg.name = std::move(name);
    bool have_background = false;

    for (const auto& [key, value] : doc.items()) {
        if (key == "n_user_agents") {
            cfg.n_user_agents = get_u32(value, key);
        } else if (key == "total_requests") {
            cfg.total_requests = get_u32(value, key);
        } else if (key == "duration_ms") {
            cfg.duration_ms = get_unsigned(value, key);
        } else if (key == "background_jobs") {
            if (!value.is_array())
                throw ConfigError("background_jobs must be an array");
            cfg.background_jobs.clear();
            for (const auto& v : value)
                cfg.background_jobs.push_back(get_u32(v, key));
            have_background = true;
        } else if (key == "service_time_ms") {
            cfg.service_time_ms = get_unsigned(value, key);
        } else if (key == "arrival_process") {
            const auto p = get_field<std::string>(value, key);
            if (p == "uniform")
                cfg.arrival_process = ArrivalProcess::Uniform;
            else if (p == "poisson")
                cfg.arrival_process = ArrivalProcess::Poisson;
            else
                throw ConfigError("arrival_process must be \"uniform\" or \"poisson\"");
        } else if (key == "seed") {
            cfg.seed = get_unsigned(value, key);
        } else if (key == "policy_name") {
            cfg.policy_name = get_field<std::string>(value, key);
        } else if (key == "background_mode") {
            const auto m = get_field<std::string>(value, key);
            if (m == "persistent")
                cfg.background_mode = BackgroundMode::Persistent;
            else if (m == "initial")
                cfg.background_mode = BackgroundMode::Initial;
            else
                throw ConfigError("background_mode must be \"persistent\" or \"initial\"");
        } else if (key == "link_delay_ms") {
            cfg.link_delay_ms = get_unsigned(value, key);
        } else {
            throw ConfigError("unknown scenario key '" + key + "'");
        }
    }
    if (!have_background)
        throw ConfigError("scenario is missing background_jobs");
    cfg.validate();
    return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open scenario '" + path.string() + "'");
    std::ostringstream text;
    text << in.rdbuf();
    if (in.bad())
        throw IoError("cannot read scenario '" + path.string() + "'");
    return parse_scenario_json(text.str(), path.stem().string());
}

ScenarioConfig bundled_scenario(int index)
{
    ScenarioConfig cfg;
    switch (index) {
    case 1: cfg.background_jobs = {50, 50, 50}; break;
    case 2: cfg.background_jobs = {100, 50, 25}; break;
    case 3: cfg.background_jobs = {200, 50, 0}; break;
    default: throw ConfigError("scenario index must be 1, 2 or 3");
    }
    cfg.name = "scenario" + std::to_string(index);
    return cfg;
}

std::vector<Arrival> generate_arrivals(const ScenarioConfig& config)
{
    const std::uint32_t total = config.total_requests;
    const double duration = static_cast<double>(config.duration_ms);
    const double spacing = duration / static_cast<double>(total);

    std::vector<Arrival> out;
    out.reserve(total);

    if (config.arrival_process == ArrivalProcess::Uniform) {
        for (std::uint32_t i = 0; i < total; ++i)
            out.push_back(Arrival{static_cast<double>(i) * duration / total, i % config.n_user_agents, i});
        return out;
    }

    // Poisson: first request at t=0, exponential gaps after that, clamped to the horizon.
    std::mt19937_64 rng(config.seed);
    SimTime t = 0;
    for (std::uint32_t i = 0; i < total; ++i) {
        if (i > 0) {
            const double u = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
            t += -spacing * std::log(u);
        }
        out.push_back(Arrival{std::min(t, duration), i % config.n_user_agents, i});
    }
    return out;
}

} // namespace sipflow
