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

#include "sipflow/policy.hpp"

#include <iterator>
#include <limits>
#include <string>

namespace sipflow {

namespace {

ServerId nth_server(const LoadSnapshot& snapshot, std::size_t index)
{
    return std::next(snapshot.per_server.begin(), static_cast<std::ptrdiff_t>(index))->first;
}

// splitmix64 finalizer; decorrelates the policy stream from other users of the seed.
std::uint64_t mix_seed(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace

std::size_t uniform_index(Rng& rng, std::size_t n)
{
    const std::uint64_t range = n;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % range;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return static_cast<std::size_t>(x % range);
}

std::pair<ServerId, Rng> select_server_random(Rng rng, const LoadSnapshot& snapshot)
{
    if (snapshot.per_server.empty())
        throw NoServersError();
    const std::size_t idx = uniform_index(rng, snapshot.per_server.size());
    return {nth_server(snapshot, idx), std::move(rng)};
}

std::pair<ServerId, RoundRobinState> select_server_round_robin(RoundRobinState state,
                                                               const LoadSnapshot& snapshot)
{
    const std::size_t count = snapshot.per_server.size();
    if (count == 0)
        throw NoServersError();
    const std::size_t idx = state.next_index % count;
    return {nth_server(snapshot, idx), RoundRobinState{(idx + 1) % count}};
}

ServerId select_server_least_request(const LoadSnapshot& snapshot)
{
    if (snapshot.per_server.empty())
        throw NoServersError();
    // per_server is ordered by id, so strict < keeps the lowest id on ties.
    auto best = snapshot.per_server.begin();
    for (auto it = std::next(best); it != snapshot.per_server.end(); ++it)
        if (it->second < best->second)
            best = it;
    return best->first;
}

Policy make_policy(std::string_view name, std::uint64_t seed)
{
    if (name == kRandomPolicyName)
        return RandomPolicy{Rng(mix_seed(seed))};
    if (name == kRoundRobinPolicyName)
        return RoundRobinPolicy{};
    if (name == kLeastRequestPolicyName)
        return LeastRequestPolicy{};
    throw ConfigError("unknown policy '" + std::string(name) +
                      "' (expected random, round-robin or least-request)");
}

std::string_view policy_name(const Policy& policy)
{
    switch (policy.index()) {
    case 0: return kRandomPolicyName;
    case 1: return kRoundRobinPolicyName;
    default: return kLeastRequestPolicyName;
    }
}

bool is_policy_name(std::string_view name)
{
    return name == kRandomPolicyName || name == kRoundRobinPolicyName || name == kLeastRequestPolicyName;
}

ServerId select_server(Policy& policy, const LoadSnapshot& snapshot)
{
    if (auto* p = std::get_if<RandomPolicy>(&policy)) {
        auto [id, rng] = select_server_random(std::move(p->rng), snapshot);
        p->rng = std::move(rng);
        return id;
    }
    if (auto* p = std::get_if<RoundRobinPolicy>(&policy)) {
        auto [id, state] = select_server_round_robin(p->state, snapshot);
        p->state = state;
        return id;
    }
    return select_server_least_request(snapshot);
}

} // namespace sipflow
