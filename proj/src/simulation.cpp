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

#include "sipflow/simulation.hpp"

#include <stdexcept>

#include <spdlog/spdlog.h>

namespace sipflow {

namespace {

constexpr std::uint16_t kFirstCallPort = 10000;
constexpr std::string_view kDomain = "@sipflow.invalid";
constexpr std::string_view kCorruptPayload = "OPTIONS sip:service SIP/2.0\r\n\r\n";

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

} // namespace

void EventQueue::push(SimTime at, SimEventKind kind)
{
    heap_.push(SimEvent{at, next_seq_++, std::move(kind)});
}

SimEvent EventQueue::pop()
{
    SimEvent e = heap_.top();
    heap_.pop();
    return e;
}

Simulation::Simulation(ScenarioConfig config)
    : config_(std::move(config))
{
    config_.validate();
    arrivals_ = generate_arrivals(config_);

    const std::size_t k = config_.server_count();
    TopologyView topo;
    topo.switch_id = 1;
    topo.service_address = service_address();
    for (std::size_t i = 0; i < k; ++i) {
        const ServerId id(static_cast<std::uint32_t>(i + 1));
        servers_.emplace_back(id, static_cast<SimTime>(config_.service_time_ms));
        topo.servers.push_back(ServerInfo{id, server_address(i), server_port(i)});
        truth_in_flight_[id] = 0;
    }
    for (std::uint32_t u = 0; u < config_.n_user_agents; ++u)
        topo.user_agent_ports.insert(ua_port(u));

    switch_ = std::make_unique<FlowSwitch>(topo.switch_id, topo.all_ports());
    controller_ = std::make_unique<Controller>(*switch_, std::move(topo),
                                               make_policy(config_.policy_name, config_.seed));

    calls_.resize(arrivals_.size());
    traces_.resize(arrivals_.size());
    corrupted_.assign(arrivals_.size(), false);
    for (const Arrival& a : arrivals_) {
        CallRecord& rec = calls_[a.call_index];
        rec.call_id = "call-" + std::to_string(a.call_index) + "-ua" + std::to_string(a.ua_id) + std::string(kDomain);
        rec.ua_id = a.ua_id;
        rec.sent_at = a.at;
        call_ids_.emplace(rec.call_id, a.call_index);
        const FlowKey key{ua_address(a.ua_id),
                          static_cast<std::uint16_t>(kFirstCallPort + a.call_index / config_.n_user_agents)};
        call_flows_.emplace(key, a.call_index);
    }
    outstanding_calls_ = static_cast<std::uint32_t>(arrivals_.size());
}

void Simulation::corrupt_request(std::uint32_t call_index)
{
    if (started_)
        throw std::logic_error("corrupt_request after the run started");
    corrupted_.at(call_index) = true;
}

void Simulation::schedule(SimTime at, SimEventKind kind)
{
    const bool background =
        std::holds_alternative<ServerJobComplete>(kind) &&
        servers_[std::get<ServerJobComplete>(kind).server_index].queue().back().background;
    if (!background)
        ++pending_traffic_;
    events_.push(at, std::move(kind));
}

bool Simulation::finished() const
{
    return started_ && (outstanding_calls_ == 0 || events_.empty());
}

void Simulation::run()
{
    while (step()) {
    }
}

bool Simulation::step()
{
    if (!started_) {
        started_ = true;
        for (std::size_t i = 0; i < servers_.size(); ++i) {
            for (SimTime at : seed_background(servers_[i], config_.background_jobs[i]))
                schedule(at, ServerJobComplete{i});
            controller_->server_manager().report_background(servers_[i].id(), config_.background_jobs[i]);
        }
        for (const Arrival& a : arrivals_)
            schedule(a.at, UaSendRequest{a.call_index});
    }
    if (finished())
        return false;

    SimEvent e = events_.pop();
    if (e.at < now_)
        throw std::logic_error("event scheduled in the past");
    now_ = e.at;
    ++stats_.events;

    bool traffic = true;
    if (auto* done = std::get_if<ServerJobComplete>(&e.kind))
        traffic = !servers_[done->server_index].queue().front().background;
    if (traffic)
        --pending_traffic_;

    std::visit([this](const auto& ev) { handle(ev); }, e.kind);

    if (pending_traffic_ == 0 && outstanding_calls_ > 0)
        abandon_stuck_calls();
    return !finished();
}

void Simulation::send_to_switch(PortId port, PacketMeta pkt)
{
    pkt.in_port = port;
    schedule(now_ + static_cast<SimTime>(config_.link_delay_ms),
             PacketDelivery{LinkDirection::ToSwitch, port, std::move(pkt)});
}

void Simulation::handle(const UaSendRequest& e)
{
    const Arrival& a = arrivals_[e.call_index];
    CallRecord& rec = calls_[e.call_index];

    PacketMeta pkt;
    pkt.src_addr = ua_address(a.ua_id);
    pkt.src_port = static_cast<std::uint16_t>(kFirstCallPort + e.call_index / config_.n_user_agents);
    pkt.dst_addr = service_address();
    pkt.dst_port = controller_->network_manager().topology().service_port;
    pkt.sim_time = now_;
    if (corrupted_[e.call_index]) {
        pkt.payload = std::string(kCorruptPayload);
    } else {
        const SipMessage invite =
            make_request(SipMethod::Invite, rec.call_id, 1, "sip:ua" + std::to_string(a.ua_id) + std::string(kDomain),
                         "sip:service" + std::string(kDomain), "z9hG4bK-" + std::to_string(e.call_index) + "-1");
        pkt.payload = encode(invite);
    }
    send_to_switch(ua_port(a.ua_id), std::move(pkt));
}

void Simulation::handle(const PacketDelivery& e)
{
    if (e.direction == LinkDirection::ToSwitch) {
        switch_ingress(e.packet);
        return;
    }
    const std::size_t port = e.port.value;
    if (port >= 1 && port <= servers_.size())
        server_receive(port - 1, e.packet);
    else
        ua_receive(e.packet);
}

void Simulation::switch_ingress(PacketMeta pkt)
{
    pkt.sim_time = now_;
    const SwitchOutcome outcome = switch_->process_packet(pkt);

    if (const auto* fwd = std::get_if<Forwarded>(&outcome)) {
        ++stats_.rule_hit_packets;
        track_wire(fwd->packet, fwd->out_port);
        schedule(now_ + static_cast<SimTime>(config_.link_delay_ms),
                 PacketDelivery{LinkDirection::ToHost, fwd->out_port, fwd->packet});
        return;
    }
    if (std::holds_alternative<Dropped>(outcome)) {
        ++stats_.rule_hit_packets;
        return;
    }

    const auto& in = std::get<PacketIn>(outcome);
    if (in.rule)
        ++stats_.rule_hit_packets;
    else
        ++stats_.table_misses;
    ++stats_.packet_ins;
    check_load_accounting();

    const PacketInDecision decision = controller_->on_packet_in(in.packet);
    const auto flow = call_flows_.find(FlowKey{pkt.src_addr, pkt.src_port});

    switch (decision.status) {
    case PacketInStatus::DecodeFailure:
        ++stats_.malformed_packets;
        [[fallthrough]];
    case PacketInStatus::Rejected:
        if (flow != call_flows_.end() && calls_[flow->second].state == CallState::Sent)
            fail_call(flow->second);
        return;
    case PacketInStatus::NewAssignment:
        if (flow != call_flows_.end())
            calls_[flow->second].server_id = decision.assignment->server_id;
        break;
    case PacketInStatus::ExistingAssignment:
        break;
    }

    if (decision.reinject) {
        // Packet-out through the table: must now hit the freshly installed rule.
        if (!switch_->lookup(*decision.reinject))
            throw std::logic_error("re-injected packet missed the installed rule");
        switch_ingress(*decision.reinject);
    }
}

void Simulation::track_wire(const PacketMeta& pkt, PortId out_port)
{
    SipMessage msg;
    try {
        msg = decode(pkt.payload);
    } catch (const SipParseError&) {
        return;
    }
    const std::size_t k = servers_.size();
    if (msg.is_request() && msg.method != SipMethod::Ack && out_port.value >= 1 && out_port.value <= k)
        ++truth_in_flight_[ServerId(out_port.value)];
    else if (msg.is_response() && msg.status_code >= 200 && pkt.in_port.value >= 1 && pkt.in_port.value <= k)
        --truth_in_flight_[ServerId(pkt.in_port.value)];
}

void Simulation::check_load_accounting()
{
    ++stats_.load_checks;
    const auto estimated = controller_->server_manager().in_flight(*switch_, controller_->flow_manager());
    if (estimated != truth_in_flight_)
        ++stats_.load_mismatches;
}

void Simulation::server_receive(std::size_t index, const PacketMeta& pkt)
{
    SipMessage msg;
    try {
        msg = decode(pkt.payload);
    } catch (const SipParseError& e) {
        spdlog::debug("server {}: dropping undecodable packet ({})", index + 1, e.what());
        return;
    }
    if (!msg.is_request())
        return;

    if (auto call = call_by_id(msg.call_id))
        traces_[*call].servers_seen.push_back(servers_[index].id());

    if (*msg.method == SipMethod::Ack)
        return;

    ServerJob job;
    job.request = std::move(msg);
    job.reply_addr = pkt.src_addr;
    job.reply_port = pkt.src_port;
    servers_[index].accept(std::move(job), now_);
    schedule(servers_[index].busy_until(), ServerJobComplete{index});
}

void Simulation::handle(const ServerJobComplete& e)
{
    ServerModel& server = servers_[e.server_index];
    ServerJob job = server.complete(now_);

    if (job.background) {
        if (config_.background_mode == BackgroundMode::Persistent) {
            ServerJob again;
            again.background = true;
            server.accept(std::move(again), now_);
            schedule(server.busy_until(), ServerJobComplete{e.server_index});
        } else {
            controller_->server_manager().report_background(server.id(),
                                                            static_cast<std::int64_t>(server.background_queued()));
        }
        return;
    }

    const SipMessage response = make_response(*job.request, 200);
    if (auto call = call_by_id(response.call_id))
        traces_[*call].servers_seen.push_back(server.id());

    PacketMeta pkt;
    pkt.src_addr = server_address(e.server_index);
    pkt.src_port = controller_->network_manager().topology().service_port;
    pkt.dst_addr = job.reply_addr;
    pkt.dst_port = job.reply_port;
    pkt.payload = encode(response);
    pkt.sim_time = now_;
    send_to_switch(server_port(e.server_index), std::move(pkt));
}

void Simulation::ua_receive(const PacketMeta& pkt)
{
    SipMessage msg;
    try {
        msg = decode(pkt.payload);
    } catch (const SipParseError&) {
        return;
    }
    const auto call = call_by_id(msg.call_id);
    if (!call || !msg.is_response() || *msg.status_code < 200)
        return;

    CallRecord& rec = calls_[*call];
    if (msg.cseq.method == SipMethod::Invite) {
        if (rec.state != CallState::Sent)
            return;
        rec.state = CallState::Responded;
        rec.responded_at = now_;

        const Arrival& a = arrivals_[*call];
        const std::string from = "sip:ua" + std::to_string(a.ua_id) + std::string(kDomain);
        const std::string to = "sip:service" + std::string(kDomain);
        const std::string branch = "z9hG4bK-" + std::to_string(*call) + "-";

        for (const SipMessage& next :
             {make_request(SipMethod::Ack, rec.call_id, 1, from, to, branch + "1"),
              make_request(SipMethod::Bye, rec.call_id, 2, from, to, branch + "2")}) {
            PacketMeta out;
            out.src_addr = pkt.dst_addr;
            out.src_port = pkt.dst_port;
            out.dst_addr = service_address();
            out.dst_port = controller_->network_manager().topology().service_port;
            out.payload = encode(next);
            out.sim_time = now_;
            send_to_switch(ua_port(a.ua_id), std::move(out));
        }
    } else if (msg.cseq.method == SipMethod::Bye && !traces_[*call].completed) {
        traces_[*call].completed = true;
        --outstanding_calls_;
    }
}

void Simulation::fail_call(std::uint32_t call_index)
{
    calls_[call_index].state = CallState::Failed;
    --outstanding_calls_;
}

void Simulation::abandon_stuck_calls()
{
    // Nothing left that could move a call forward.
    for (std::uint32_t i = 0; i < calls_.size(); ++i) {
        if (calls_[i].state == CallState::Sent) {
            calls_[i].state = CallState::Failed;
            spdlog::debug("call {} never answered; marked failed", calls_[i].call_id);
        }
    }
    outstanding_calls_ = 0;
}

std::optional<std::uint32_t> Simulation::call_by_id(const std::string& call_id) const
{
    auto it = call_ids_.find(call_id);
    if (it == call_ids_.end())
        return std::nullopt;
    return it->second;
}

MetricsReport Simulation::report() const
{
    ScenarioMeta meta{config_.name, config_.policy_name, config_.n_user_agents, servers_.size()};
    return compute_metrics(calls_, meta);
}

MetricsReport run_scenario(const ScenarioConfig& config)
{
    Simulation sim(config);
    sim.run();
    return sim.report();
}

} // namespace sipflow
