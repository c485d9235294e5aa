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

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "sipflow/types.hpp"

namespace sipflow {

enum class ArrivalProcess { Uniform, Poisson };

/// How the per-server background load behaves after t=0.
enum class BackgroundMode {
    Persistent,   // each background job re-enters the queue when it completes
    Initial,      // background jobs drain once and are gone
};

std::string_view to_string(ArrivalProcess p);
std::string_view to_string(BackgroundMode m);

struct ScenarioConfig {
    std::string name = "custom";   // taken from the file stem, not a JSON key
    std::uint32_t n_user_agents = 20;
    std::uint32_t total_requests = 200;
    std::uint64_t duration_ms = 50'000;
    std::vector<std::uint32_t> background_jobs{50, 50, 50};
    std::uint64_t service_time_ms = 50;
    ArrivalProcess arrival_process = ArrivalProcess::Uniform;
    std::uint64_t seed = 1;
    std::string policy_name = "least-request";
    BackgroundMode background_mode = BackgroundMode::Persistent;
    std::uint64_t link_delay_ms = 0;

    std::size_t server_count() const { return background_jobs.size(); }

    /// Throws ConfigError.
    void validate() const;
};

/// Keys are the snake_case field names above (except `name`); unknown keys
/// and type mismatches are ConfigErrors. Missing keys keep their defaults,
/// apart from background_jobs which is required.
ScenarioConfig parse_scenario_json(std::string_view text, std::string name = "custom");

/// Throws IoError if the file cannot be read, ConfigError if it is invalid.
ScenarioConfig load_scenario(const std::filesystem::path& path);

/// The bundled scenarios: 1 → (50,50,50), 2 → (100,50,25), 3 → (200,50,0).
ScenarioConfig bundled_scenario(int index);

struct Arrival {
    SimTime at = 0;
    std::uint32_t ua_id = 0;        // 0-based
    std::uint32_t call_index = 0;   // 0-based, send order

    friend bool operator==(const Arrival&, const Arrival&) = default;
};

/// Exactly total_requests arrivals in [0, duration_ms], ordered by time.
std::vector<Arrival> generate_arrivals(const ScenarioConfig& config);

} // namespace sipflow
