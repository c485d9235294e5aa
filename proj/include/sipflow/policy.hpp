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
#include <map>
#include <random>
#include <string_view>
#include <utility>
#include <variant>

#include "sipflow/types.hpp"

namespace sipflow {

/// Estimated load per server at one instant: background jobs plus
/// transactions in flight.
struct LoadSnapshot {
    SimTime taken_at = 0;
    std::map<ServerId, std::int64_t> per_server;

    friend bool operator==(const LoadSnapshot&, const LoadSnapshot&) = default;
};

class NoServersError : public Error {
public:
    NoServersError() : Error("no servers available for selection") {}
};

using Rng = std::mt19937_64;

/// Unbiased draw from [0, n). Portable across standard libraries, unlike
/// std::uniform_int_distribution.
std::size_t uniform_index(Rng& rng, std::size_t n);

struct RoundRobinState {
    std::size_t next_index = 0;
    friend bool operator==(const RoundRobinState&, const RoundRobinState&) = default;
};

std::pair<ServerId, Rng> select_server_random(Rng rng, const LoadSnapshot& snapshot);
std::pair<ServerId, RoundRobinState> select_server_round_robin(RoundRobinState state,
                                                               const LoadSnapshot& snapshot);
// Lowest estimated load; ties go to the lowest server id.
ServerId select_server_least_request(const LoadSnapshot& snapshot);

struct RandomPolicy {
    Rng rng;
    friend bool operator==(const RandomPolicy&, const RandomPolicy&) = default;
};

struct RoundRobinPolicy {
    RoundRobinState state;
    friend bool operator==(const RoundRobinPolicy&, const RoundRobinPolicy&) = default;
};

struct LeastRequestPolicy {
    friend bool operator==(const LeastRequestPolicy&, const LeastRequestPolicy&) = default;
};

using Policy = std::variant<RandomPolicy, RoundRobinPolicy, LeastRequestPolicy>;

inline constexpr std::string_view kRandomPolicyName = "random";
inline constexpr std::string_view kRoundRobinPolicyName = "round-robin";
inline constexpr std::string_view kLeastRequestPolicyName = "least-request";

/// Builds a policy in its initial state. Throws ConfigError for unknown names.
Policy make_policy(std::string_view name, std::uint64_t seed);
std::string_view policy_name(const Policy& policy);
bool is_policy_name(std::string_view name);

/// Runs the policy's selection and advances its state.
ServerId select_server(Policy& policy, const LoadSnapshot& snapshot);

} // namespace sipflow
