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
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "sipflow/types.hpp"

namespace sipflow {

struct PacketMeta {
    PortId in_port;
    Address src_addr;
    Address dst_addr;
    std::uint16_t src_port = 0;
    std::uint16_t dst_port = 0;
    std::string payload;   // encoded SIP message
    SimTime sim_time = 0;

    friend bool operator==(const PacketMeta&, const PacketMeta&) = default;
};

/// L1-L4 match; an empty optional is a wildcard.
struct MatchFields {
    std::optional<PortId> in_port;
    std::optional<Address> src_addr;
    std::optional<Address> dst_addr;
    std::optional<std::uint16_t> src_port;
    std::optional<std::uint16_t> dst_port;

    bool matches(const PacketMeta& pkt) const;
    bool is_all_wildcard() const;

    friend bool operator==(const MatchFields&, const MatchFields&) = default;
};

struct Forward {
    PortId out_port;
    friend bool operator==(const Forward&, const Forward&) = default;
};

struct RewriteDstAndForward {
    Address new_dst_addr;
    std::uint16_t new_dst_port = 0;
    PortId out_port;
    friend bool operator==(const RewriteDstAndForward&, const RewriteDstAndForward&) = default;
};

struct SendToController {
    friend bool operator==(const SendToController&, const SendToController&) = default;
};

struct Drop {
    friend bool operator==(const Drop&, const Drop&) = default;
};

using FlowAction = std::variant<Forward, RewriteDstAndForward, SendToController, Drop>;

using Priority = std::uint32_t;

struct FlowRule {
    RuleId id;
    MatchFields match;
    FlowAction action;
    Priority priority = 0;
    std::uint64_t packet_counter = 0;
    std::uint64_t byte_counter = 0;
};

enum class FlowTableErrorKind { DuplicateExactRule, WildcardMatch, UnknownPort };

class FlowTableError : public Error {
public:
    FlowTableError(FlowTableErrorKind kind, const std::string& what)
        : Error(what), kind_(kind) {}
    FlowTableErrorKind kind() const noexcept { return kind_; }

private:
    FlowTableErrorKind kind_;
};

/**
 * Priority-ordered rule store.
 *
 * Rules are kept sorted by (priority descending, id ascending), so the first
 * matching rule is the lookup winner. Ids are assigned from 1 and never reused.
 */
class FlowTable {
public:
    RuleId install(const MatchFields& match, const FlowAction& action, Priority priority);
    bool remove(RuleId id);

    const FlowRule* lookup(const PacketMeta& pkt) const;
    const FlowRule* find(RuleId id) const;

    std::span<const FlowRule> rules() const { return rules_; }
    std::size_t size() const { return rules_.size(); }

    // Counter update on a lookup hit. Counters only ever grow.
    void count_hit(RuleId id, std::size_t bytes);

private:
    std::vector<FlowRule> rules_;
    std::uint64_t next_id_ = 1;
};

struct RuleCounters {
    RuleId rule_id;
    MatchFields match;
    std::uint64_t packet_counter = 0;
    std::uint64_t byte_counter = 0;
};

struct Forwarded {
    PortId out_port;
    PacketMeta packet;
    RuleId rule;
};

struct Dropped {
    RuleId rule;
};

struct PacketIn {
    PacketMeta packet;
    std::optional<RuleId> rule;   // set when a SendToController rule hit
};

using SwitchOutcome = std::variant<Forwarded, Dropped, PacketIn>;

/// Software datapath with a single flow table whose miss action is
/// SendToController.
class FlowSwitch {
public:
    FlowSwitch(std::uint64_t datapath_id, std::set<PortId> ports);

    std::uint64_t datapath_id() const { return datapath_id_; }
    const std::set<PortId>& ports() const { return ports_; }
    bool has_port(PortId p) const { return ports_.contains(p); }

    /// Throws FlowTableError on an all-wildcard match, an unknown out_port,
    /// or an existing rule with identical (match, priority).
    RuleId install_rule(const MatchFields& match, const FlowAction& action, Priority priority);
    bool remove_rule(RuleId id) { return table_.remove(id); }

    const FlowRule* lookup(const PacketMeta& pkt) const { return table_.lookup(pkt); }
    const FlowTable& table() const { return table_; }

    /// Throws std::invalid_argument when pkt.in_port is not a switch port.
    SwitchOutcome process_packet(const PacketMeta& pkt);

    std::vector<RuleCounters> read_counters() const;

    /// One rule per line: id, priority, match, action, counters.
    void dump_flows(std::ostream& os) const;

private:
    std::uint64_t datapath_id_;
    std::set<PortId> ports_;
    FlowTable table_;
};

std::string to_string(const MatchFields& match);
std::string to_string(const FlowAction& action);

} // namespace sipflow
