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

#include <compare>
#include <cstdint>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <string>

namespace sipflow {

// Virtual time in milliseconds.
using SimTime = double;

/// Integer identifier that does not implicitly convert to other identifiers.
template <class Tag, class Rep = std::uint32_t>
struct StrongId {
    Rep value{};

    constexpr StrongId() = default;
    constexpr explicit StrongId(Rep v) : value(v) {}

    friend constexpr auto operator<=>(const StrongId&, const StrongId&) = default;

    friend std::ostream& operator<<(std::ostream& os, const StrongId& id)
    { return os << id.value; }
};

struct ServerIdTag {};
struct AddressTag {};
struct PortIdTag {};
struct RuleIdTag {};

using ServerId = StrongId<ServerIdTag>;     // 1-based, matches "Server 1..k"
using Address = StrongId<AddressTag>;       // node address on the simulated LAN
using PortId = StrongId<PortIdTag>;         // switch port number
using RuleId = StrongId<RuleIdTag, std::uint64_t>;

/// Base class for every error this library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace sipflow

template <class Tag, class Rep>
struct std::hash<sipflow::StrongId<Tag, Rep>> {
    std::size_t operator()(const sipflow::StrongId<Tag, Rep>& id) const noexcept
    { return std::hash<Rep>{}(id.value); }
};
