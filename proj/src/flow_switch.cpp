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

#include "sipflow/flow_switch.hpp"

#include <algorithm>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace sipflow {

namespace {

template <class T>
bool field_matches(const std::optional<T>& want, const T& have)
{
    return !want || *want == have;
}

// Lookup precedence: higher priority first, then lower id.
bool precedes(const FlowRule& a, const FlowRule& b)
{
    if (a.priority != b.priority)
        return a.priority > b.priority;
    return a.id < b.id;
}

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

} // namespace

bool MatchFields::matches(const PacketMeta& pkt) const
{
    return field_matches(in_port, pkt.in_port) && field_matches(src_addr, pkt.src_addr) &&
           field_matches(dst_addr, pkt.dst_addr) && field_matches(src_port, pkt.src_port) &&
           field_matches(dst_port, pkt.dst_port);
}

bool MatchFields::is_all_wildcard() const
{
    return !in_port && !src_addr && !dst_addr && !src_port && !dst_port;
}

RuleId FlowTable::install(const MatchFields& match, const FlowAction& action, Priority priority)
{
    if (match.is_all_wildcard())
        throw FlowTableError(FlowTableErrorKind::WildcardMatch,
                             "all-wildcard match is reserved for the table-miss entry");
    auto dup = std::find_if(rules_.begin(), rules_.end(), [&](const FlowRule& r) {
        return r.priority == priority && r.match == match;
    });
    if (dup != rules_.end())
        throw FlowTableError(FlowTableErrorKind::DuplicateExactRule,
                             "rule with identical match and priority already installed (id " +
                                 std::to_string(dup->id.value) + ")");

    FlowRule rule{RuleId(next_id_++), match, action, priority, 0, 0};
    auto pos = std::upper_bound(rules_.begin(), rules_.end(), rule, precedes);
    rules_.insert(pos, std::move(rule));
    return RuleId(next_id_ - 1);
}

bool FlowTable::remove(RuleId id)
{
    auto it = std::find_if(rules_.begin(), rules_.end(), [&](const FlowRule& r) { return r.id == id; });
    if (it == rules_.end())
        return false;
    rules_.erase(it);
    return true;
}

const FlowRule* FlowTable::lookup(const PacketMeta& pkt) const
{
    for (const FlowRule& r : rules_)
        if (r.match.matches(pkt))
            return &r;
    return nullptr;
}

const FlowRule* FlowTable::find(RuleId id) const
{
    for (const FlowRule& r : rules_)
        if (r.id == id)
            return &r;
    return nullptr;
}

void FlowTable::count_hit(RuleId id, std::size_t bytes)
{
    for (FlowRule& r : rules_) {
        if (r.id == id) {
            r.packet_counter += 1;
            r.byte_counter += bytes;
            return;
        }
    }
}

FlowSwitch::FlowSwitch(std::uint64_t datapath_id, std::set<PortId> ports)
    : datapath_id_(datapath_id)
    , ports_(std::move(ports))
{
}

RuleId FlowSwitch::install_rule(const MatchFields& match, const FlowAction& action, Priority priority)
{
    auto check_port = [&](PortId p) {
        if (!has_port(p))
            throw FlowTableError(FlowTableErrorKind::UnknownPort,
                                 "action references unknown port " + std::to_string(p.value));
    };
    std::visit(overloaded{
                   [&](const Forward& a) { check_port(a.out_port); },
                   [&](const RewriteDstAndForward& a) { check_port(a.out_port); },
                   [](const SendToController&) {},
                   [](const Drop&) {},
               },
               action);
    if (match.in_port && !has_port(*match.in_port))
        throw FlowTableError(FlowTableErrorKind::UnknownPort,
                             "match references unknown port " + std::to_string(match.in_port->value));
    return table_.install(match, action, priority);
}

SwitchOutcome FlowSwitch::process_packet(const PacketMeta& pkt)
{
    if (!has_port(pkt.in_port))
        throw std::invalid_argument("packet arrived on unknown port " + std::to_string(pkt.in_port.value));

    const FlowRule* rule = table_.lookup(pkt);
    if (!rule)
        return PacketIn{pkt, std::nullopt};

    const RuleId id = rule->id;
    const FlowAction action = rule->action;
    table_.count_hit(id, pkt.payload.size());

    return std::visit(overloaded{
                          [&](const Forward& a) -> SwitchOutcome { return Forwarded{a.out_port, pkt, id}; },
                          [&](const RewriteDstAndForward& a) -> SwitchOutcome {
                              PacketMeta out = pkt;
                              out.dst_addr = a.new_dst_addr;
                              out.dst_port = a.new_dst_port;
                              return Forwarded{a.out_port, std::move(out), id};
                          },
                          [&](const SendToController&) -> SwitchOutcome { return PacketIn{pkt, id}; },
                          [&](const Drop&) -> SwitchOutcome { return Dropped{id}; },
                      },
                      action);
}

std::vector<RuleCounters> FlowSwitch::read_counters() const
{
    std::vector<RuleCounters> out;
    out.reserve(table_.size());
    for (const FlowRule& r : table_.rules())
        out.push_back(RuleCounters{r.id, r.match, r.packet_counter, r.byte_counter});
    return out;
}

void FlowSwitch::dump_flows(std::ostream& os) const
{
    for (const FlowRule& r : table_.rules()) {
        os << "id=" << r.id.value << " priority=" << r.priority << " match=" << to_string(r.match)
           << " action=" << to_string(r.action) << " packets=" << r.packet_counter
           << " bytes=" << r.byte_counter << '\n';
    }
}

std::string to_string(const MatchFields& m)
{
    std::ostringstream os;
    const char* sep = "";
    auto field = [&](const char* name, const auto& v) {
        if (v) {
            os << sep << name << '=' << *v;
            sep = ",";
        }
    };
    field("in_port", m.in_port);
    field("src", m.src_addr);
    field("dst", m.dst_addr);
    field("src_port", m.src_port);
    field("dst_port", m.dst_port);
    if (m.is_all_wildcard())
        os << '*';
    return os.str();
}

std::string to_string(const FlowAction& action)
{
    return std::visit(overloaded{
                          [](const Forward& a) { return "output:" + std::to_string(a.out_port.value); },
                          [](const RewriteDstAndForward& a) {
                              return "set_dst:" + std::to_string(a.new_dst_addr.value) + ":" +
                                     std::to_string(a.new_dst_port) + ",output:" +
                                     std::to_string(a.out_port.value);
                          },
                          [](const SendToController&) { return std::string("controller"); },
                          [](const Drop&) { return std::string("drop"); },
                      },
                      action);
}

} // namespace sipflow
