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
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sipflow/metrics.hpp"
#include "sipflow/scenario.hpp"

namespace sipflow {

/// `base` with n user agents and total_requests scaled by n / base.n_user_agents.
ScenarioConfig scaled_for_n(const ScenarioConfig& base, std::uint32_t n);

/// One report per n, in input order. Scenarios run concurrently.
std::vector<std::pair<std::uint32_t, MetricsReport>> sweep_n(const ScenarioConfig& base,
                                                             std::span<const std::uint32_t> n_values);

/// Runs every policy on the same seed, hence the same arrival schedule.
ComparisonTable compare_policies(const ScenarioConfig& config, std::span<const std::string> policies,
                                 std::uint64_t seed);

} // namespace sipflow
