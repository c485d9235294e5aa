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
#include <memory>
#include <queue>
#include <set>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "sipflow/controller.hpp"
#include "sipflow/flow_switch.hpp"
#include "sipflow/metrics.hpp"
#include "sipflow/scenario.hpp"
#include "sipflow/server_model.hpp"

namespace sipflow {

struct UaSendRequest {
    std::uint32_t call_index = 0;
};

enum class LinkDirection { ToSwitch, ToHost };

/// A packet finishing a hop. ToSwitch: ingress on `port`. ToHost: egress
/// from `port` to the attached host.
struct PacketDelivery {
    LinkDirection direction = LinkDirection::ToSwitch;
    PortId port;
    PacketMeta packet;
};

struct ServerJobComplete {
    std::size_t server_index = 0;
};

using SimEventKind = std::variant<UaSendRequest, PacketDelivery, ServerJobComplete>;

struct SimEvent {
    SimTime at = 0;
    std::uint64_t seq = 0;   // tie-break: insertion order
    SimEventKind kind;
};

/// Min-heap on (at, seq).
class EventQueue {
public:
    void push(SimTime at, SimEventKind kind);
    SimEvent pop();
    bool empty() const { return heap_.empty(); }
    std::size_t size() const { return heap_.size(); }

private:
    struct Later {
        bool operator()(const SimEvent& a, const SimEvent& b) const
        { return a.at != b.at ? a.at > b.at : a.seq > b.seq; }
    };
    std::priority_queue<SimEvent, std::vector<SimEvent>, Later> heap_;
    std::uint64_t next_seq_ = 0;
};

struct SimulationStats {
    std::uint64_t events = 0;
    std::uint64_t rule_hit_packets = 0;
    std::uint64_t table_misses = 0;
    std::uint64_t packet_ins = 0;
    std::uint64_t malformed_packets = 0;
    std::uint64_t load_checks = 0;
    std::uint64_t load_mismatches = 0;   // counter-derived in_flight != ground truth
};

/// Every server a call's packets were delivered to or sent from.
struct CallTrace {
    std::vector<ServerId> servers_seen;
    bool completed = false;   // BYE answered
};

/**
 * One scenario run: n user agents and k servers around a single switch,
 * programmed reactively by the controller.
 *
 * Addresses: service 1, server i at 100+i on port i, user agent u at 1000+u
 * on port k+1+u. Call c of a user agent uses source port 10000+c.
 */
class Simulation {
public:
    explicit Simulation(ScenarioConfig config);

    Simulation(const Simulation&) = delete;
    Simulation& operator=(const Simulation&) = delete;

    /// Replaces the INVITE of `call_index` with undecodable bytes.
    void corrupt_request(std::uint32_t call_index);

    bool step();
    void run();
    bool finished() const;

    MetricsReport report() const;

    SimTime now() const { return now_; }
    const ScenarioConfig& config() const { return config_; }
    const std::vector<Arrival>& arrivals() const { return arrivals_; }
    const std::vector<CallRecord>& calls() const { return calls_; }
    const std::vector<CallTrace>& traces() const { return traces_; }
    const std::vector<ServerModel>& servers() const { return servers_; }
    const FlowSwitch& flow_switch() const { return *switch_; }
    const Controller& controller() const { return *controller_; }
    Controller& controller() { return *controller_; }
    const SimulationStats& stats() const { return stats_; }

    /// Transactions forwarded to each server minus final responses it returned,
    /// as observed on the wire.
    const std::map<ServerId, std::int64_t>& ground_truth_in_flight() const { return truth_in_flight_; }

    static Address service_address() { return Address(1); }
    Address server_address(std::size_t index) const { return Address(static_cast<std::uint32_t>(101 + index)); }
    PortId server_port(std::size_t index) const { return PortId(static_cast<std::uint32_t>(1 + index)); }
    Address ua_address(std::uint32_t ua) const { return Address(1000 + ua); }
    PortId ua_port(std::uint32_t ua) const
    { return PortId(static_cast<std::uint32_t>(servers_.size() + 1 + ua)); }

private:
    void schedule(SimTime at, SimEventKind kind);
    void send_to_switch(PortId port, PacketMeta pkt);
    void handle(const UaSendRequest& e);
    void handle(const PacketDelivery& e);
    void handle(const ServerJobComplete& e);
    void switch_ingress(PacketMeta pkt);
    void server_receive(std::size_t server_index, const PacketMeta& pkt);
    void ua_receive(const PacketMeta& pkt);
    void track_wire(const PacketMeta& pkt, PortId out_port);
    void check_load_accounting();
    void fail_call(std::uint32_t call_index);
    void abandon_stuck_calls();
    std::optional<std::uint32_t> call_by_id(const std::string& call_id) const;

    ScenarioConfig config_;
    std::vector<Arrival> arrivals_;
    std::unique_ptr<FlowSwitch> switch_;
    std::unique_ptr<Controller> controller_;
    std::vector<ServerModel> servers_;
    std::vector<CallRecord> calls_;
    std::vector<CallTrace> traces_;
    std::vector<bool> corrupted_;
    std::unordered_map<std::string, std::uint32_t> call_ids_;
    std::map<FlowKey, std::uint32_t> call_flows_;
    std::map<ServerId, std::int64_t> truth_in_flight_;
    EventQueue events_;
    SimulationStats stats_;
    SimTime now_ = 0;
    std::uint64_t pending_traffic_ = 0;   // queued events other than background completions
    std::uint32_t outstanding_calls_ = 0;
    bool started_ = false;
};

/// Runs the whole event loop. Throws ConfigError for an invalid config.
MetricsReport run_scenario(const ScenarioConfig& config);

} // namespace sipflow
