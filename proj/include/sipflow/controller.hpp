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
#include <optional>
#include <set>
#include <vector>

#include "sipflow/flow_switch.hpp"
#include "sipflow/policy.hpp"
#include "sipflow/types.hpp"

namespace sipflow {

struct ServerInfo {
    ServerId id;
    Address address;
    PortId port;
};

/// What the controller knows about the single-switch topology.
struct TopologyView {
    std::uint64_t switch_id = 1;
    std::vector<ServerInfo> servers;          // ascending id
    std::set<PortId> user_agent_ports;
    Address service_address;                  // virtual address UAs dial
    std::uint16_t service_port = 5060;

    /// Throws ConfigError on duplicate server address/port, an empty server
    /// list, or a port shared between a server and a user agent.
    void validate() const;
    const ServerInfo* server(ServerId id) const;
    std::set<PortId> all_ports() const;
};

class NetworkManager {
public:
    explicit NetworkManager(TopologyView topology);

    const TopologyView& topology() const { return topology_; }
    const ServerInfo* server(ServerId id) const { return topology_.server(id); }
    bool is_user_agent_port(PortId p) const { return topology_.user_agent_ports.contains(p); }

private:
    TopologyView topology_;
};

/// A user-agent flow: the key flow rules can actually match on.
struct FlowKey {
    Address src_addr;
    std::uint16_t src_port = 0;

    friend auto operator<=>(const FlowKey&, const FlowKey&) = default;
};

struct FlowAssignment {
    FlowKey ua_flow;
    PortId ua_port;
    ServerId server_id;
    RuleId forward_rule_id;
    RuleId reverse_rule_id;
    SimTime created_at = 0;
};

inline constexpr Priority kSteeringPriority = 100;

/// Installs and remembers the forward/reverse rule pair that pins a UA flow
/// to one server.
class FlowManager {
public:
    const FlowAssignment* find(const FlowKey& key) const;
    const std::map<FlowKey, FlowAssignment>& assignments() const { return assignments_; }

    /// Installs both rules for `key` towards `server` and records the
    /// assignment, replacing an existing one whose rules were removed.
    const FlowAssignment& steer(FlowSwitch& sw, const TopologyView& topo, const FlowKey& key,
                                PortId ua_port, const ServerInfo& server, SimTime now);

    /// True when both rules of the assignment are still in the table.
    static bool rules_present(const FlowSwitch& sw, const FlowAssignment& a);

private:
    std::map<FlowKey, FlowAssignment> assignments_;
};

/**
 * Derives per-server load from flow counters.
 *
 * Forward-rule packets of a dialog are INVITE, then one ACK once the INVITE's
 * final response is back, then BYE. Every non-ACK request gets exactly one
 * final response on the reverse rule. Servers report their background queue
 * length separately since background work never crosses the switch.
 */
class ServerManager {
public:
    explicit ServerManager(const std::vector<ServerInfo>& servers);

    void report_background(ServerId server, std::int64_t jobs);
    std::int64_t background(ServerId server) const;

    /// Transactions forwarded to each server minus final responses returned.
    std::map<ServerId, std::int64_t> in_flight(const FlowSwitch& sw, const FlowManager& flows) const;

    LoadSnapshot poll_server_loads(const FlowSwitch& sw, const FlowManager& flows, SimTime now) const;

private:
    std::map<ServerId, std::int64_t> background_;
};

/// Requests outstanding on one dialog given its rule counters.
std::int64_t dialog_in_flight(std::uint64_t forward_packets, std::uint64_t reverse_packets);

enum class PacketInStatus {
    NewAssignment,
    ExistingAssignment,
    DecodeFailure,
    Rejected,   // not a request from a UA port to the service address
};

struct PacketInDecision {
    PacketInStatus status = PacketInStatus::Rejected;
    std::optional<FlowAssignment> assignment;
    std::vector<RuleId> installed_rules;
    std::optional<LoadSnapshot> snapshot;   // set when the policy was consulted
    std::optional<PacketMeta> reinject;     // packet-out back through the table
};

/**
 * Central controller: network manager, server manager, flow manager and the
 * load-balancing application (the active Policy).
 *
 * Holds a non-owning reference to the switch it programs; the switch must
 * outlive the controller.
 */
class Controller {
public:
    Controller(FlowSwitch& sw, TopologyView topology, Policy policy);

    PacketInDecision on_packet_in(const PacketMeta& pkt);

    /// Subsequent selections use `policy`; installed rules and assignments stay.
    void set_policy(Policy policy);
    const Policy& policy() const { return policy_; }

    const NetworkManager& network_manager() const { return network_; }
    ServerManager& server_manager() { return servers_; }
    const ServerManager& server_manager() const { return servers_; }
    const FlowManager& flow_manager() const { return flows_; }

    LoadSnapshot poll_server_loads(SimTime now) const
    { return servers_.poll_server_loads(switch_, flows_, now); }

    std::uint64_t malformed_packets() const { return malformed_; }
    std::uint64_t policy_invocations() const { return policy_calls_; }

private:
    FlowSwitch& switch_;
    NetworkManager network_;
    ServerManager servers_;
    FlowManager flows_;
    Policy policy_;
    std::uint64_t malformed_ = 0;
    std::uint64_t policy_calls_ = 0;
};

} // namespace sipflow
