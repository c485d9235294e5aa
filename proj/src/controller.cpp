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

#include "sipflow/controller.hpp"

#include <algorithm>
#include <unordered_map>

#include <spdlog/spdlog.h>

#include "sipflow/sip_message.hpp"

namespace sipflow {

void TopologyView::validate() const
{
    if (servers.empty())
        throw ConfigError("topology has no servers");
    std::set<Address> addresses{service_address};
    std::set<PortId> ports;
    for (std::size_t i = 0; i < servers.size(); ++i) {
        const ServerInfo& s = servers[i];
        if (i > 0 && !(servers[i - 1].id < s.id))
            throw ConfigError("servers must be listed in ascending id order");
        if (!addresses.insert(s.address).second)
            throw ConfigError("duplicate server address " + std::to_string(s.address.value));
        if (!ports.insert(s.port).second)
            throw ConfigError("server port " + std::to_string(s.port.value) + " used twice");
    }
    for (PortId p : user_agent_ports)
        if (ports.contains(p))
            throw ConfigError("port " + std::to_string(p.value) + " faces both a server and a user agent");
}

const ServerInfo* TopologyView::server(ServerId id) const
{
    auto it = std::find_if(servers.begin(), servers.end(), [&](const ServerInfo& s) { return s.id == id; });
    return it == servers.end() ? nullptr : &*it;
}

std::set<PortId> TopologyView::all_ports() const
{
    std::set<PortId> ports = user_agent_ports;
    for (const ServerInfo& s : servers)
        ports.insert(s.port);
    return ports;
}

NetworkManager::NetworkManager(TopologyView topology)
    : topology_(std::move(topology))
{
    topology_.validate();
}

const FlowAssignment* FlowManager::find(const FlowKey& key) const
{
    auto it = assignments_.find(key);
    return it == assignments_.end() ? nullptr : &it->second;
}

bool FlowManager::rules_present(const FlowSwitch& sw, const FlowAssignment& a)
{
    return sw.table().find(a.forward_rule_id) && sw.table().find(a.reverse_rule_id);
}

const FlowAssignment& FlowManager::steer(FlowSwitch& sw, const TopologyView& topo, const FlowKey& key,
                                         PortId ua_port, const ServerInfo& server, SimTime now)
{
    MatchFields forward;
    forward.in_port = ua_port;
    forward.src_addr = key.src_addr;
    forward.src_port = key.src_port;
    forward.dst_addr = topo.service_address;
    forward.dst_port = topo.service_port;

    MatchFields reverse;
    reverse.in_port = server.port;
    reverse.src_addr = server.address;
    reverse.src_port = topo.service_port;
    reverse.dst_addr = key.src_addr;
    reverse.dst_port = key.src_port;

    // Leftovers from a partially removed pair would collide with the reinstall.
    if (auto it = assignments_.find(key); it != assignments_.end()) {
        sw.remove_rule(it->second.forward_rule_id);
        sw.remove_rule(it->second.reverse_rule_id);
    }

    const RuleId fwd = sw.install_rule(
        forward, RewriteDstAndForward{server.address, topo.service_port, server.port}, kSteeringPriority);
    const RuleId rev =
        sw.install_rule(reverse, RewriteDstAndForward{key.src_addr, key.src_port, ua_port}, kSteeringPriority);

    FlowAssignment a{key, ua_port, server.id, fwd, rev, now};
    return assignments_.insert_or_assign(key, a).first->second;
}

ServerManager::ServerManager(const std::vector<ServerInfo>& servers)
{
    for (const ServerInfo& s : servers)
        background_[s.id] = 0;
}

void ServerManager::report_background(ServerId server, std::int64_t jobs)
{
    auto it = background_.find(server);
    if (it == background_.end())
        throw std::invalid_argument("background report for unknown server " + std::to_string(server.value));
    it->second = std::max<std::int64_t>(jobs, 0);
}

std::int64_t ServerManager::background(ServerId server) const
{
    auto it = background_.find(server);
    return it == background_.end() ? 0 : it->second;
}

std::int64_t dialog_in_flight(std::uint64_t forward_packets, std::uint64_t reverse_packets)
{
    const std::uint64_t acks = forward_packets >= 2 ? 1 : 0;
    return static_cast<std::int64_t>(forward_packets - acks) - static_cast<std::int64_t>(reverse_packets);
}

std::map<ServerId, std::int64_t> ServerManager::in_flight(const FlowSwitch& sw, const FlowManager& flows) const
{
    std::unordered_map<RuleId, std::uint64_t> packets;
    for (const RuleCounters& c : sw.read_counters())
        packets.emplace(c.rule_id, c.packet_counter);

    auto count = [&](RuleId id) {
        auto it = packets.find(id);
        return it == packets.end() ? std::uint64_t{0} : it->second;
    };

    std::map<ServerId, std::int64_t> out;
    for (const auto& [server, _] : background_)
        out[server] = 0;
    for (const auto& [key, a] : flows.assignments())
        out[a.server_id] += dialog_in_flight(count(a.forward_rule_id), count(a.reverse_rule_id));
    return out;
}

LoadSnapshot ServerManager::poll_server_loads(const FlowSwitch& sw, const FlowManager& flows, SimTime now) const
{
    LoadSnapshot snap;
    snap.taken_at = now;
    for (const auto& [server, in_flight] : in_flight(sw, flows))
        snap.per_server[server] = background(server) + in_flight;
    return snap;
}

Controller::Controller(FlowSwitch& sw, TopologyView topology, Policy policy)
    : switch_(sw)
    , network_(std::move(topology))
    , servers_(network_.topology().servers)
    , policy_(std::move(policy))
{
    for (PortId p : network_.topology().all_ports())
        if (!sw.has_port(p))
            throw ConfigError("topology port " + std::to_string(p.value) + " missing on switch");
}

void Controller::set_policy(Policy policy)
{
    spdlog::debug("controller: policy set to {}", policy_name(policy));
    policy_ = std::move(policy);
}

PacketInDecision Controller::on_packet_in(const PacketMeta& pkt)
{
    PacketInDecision decision;
    const TopologyView& topo = network_.topology();

    SipMessage msg;
    try {
        msg = decode(pkt.payload);
    } catch (const SipParseError& e) {
        ++malformed_;
        decision.status = PacketInStatus::DecodeFailure;
        spdlog::debug("controller: dropping undecodable packet from {}:{} ({})", pkt.src_addr.value,
                      pkt.src_port, e.what());
        return decision;
    }

    if (!msg.is_request() || !network_.is_user_agent_port(pkt.in_port) ||
        pkt.dst_addr != topo.service_address || pkt.dst_port != topo.service_port) {
        decision.status = PacketInStatus::Rejected;
        return decision;
    }

    const FlowKey key{pkt.src_addr, pkt.src_port};
    const FlowAssignment* existing = flows_.find(key);

    if (existing && FlowManager::rules_present(switch_, *existing)) {
        decision.status = PacketInStatus::ExistingAssignment;
        decision.assignment = *existing;
        decision.reinject = pkt;
        return decision;
    }

    ServerId chosen;
    if (existing) {
        // Affinity survives rule removal: reinstall towards the same server.
        chosen = existing->server_id;
        decision.status = PacketInStatus::ExistingAssignment;
    } else {
        LoadSnapshot snap = servers_.poll_server_loads(switch_, flows_, pkt.sim_time);
        chosen = select_server(policy_, snap);
        ++policy_calls_;
        decision.snapshot = std::move(snap);
        decision.status = PacketInStatus::NewAssignment;
    }

    const ServerInfo* server = topo.server(chosen);
    if (!server)
        throw NoServersError();

    const FlowAssignment& a = flows_.steer(switch_, topo, key, pkt.in_port, *server, pkt.sim_time);
    decision.assignment = a;
    decision.installed_rules = {a.forward_rule_id, a.reverse_rule_id};
    decision.reinject = pkt;

    spdlog::debug("controller: {} {}:{} -> server {} ({})", to_string(*msg.method), key.src_addr.value,
                  key.src_port, chosen.value, policy_name(policy_));
    return decision;
}

} // namespace sipflow
