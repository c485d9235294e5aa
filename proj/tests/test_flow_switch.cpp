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

#include <doctest.h>

#include <map>
#include <random>
#include <sstream>

#include "sipflow/flow_switch.hpp"

using namespace sipflow;

namespace {

const PortId P1{1}, P2{2}, P3{3}, P4{4};
const Address UA1{1001}, UA2{1002}, VIP{1}, S2{102};

FlowSwitch make_switch()
{
    return FlowSwitch(1, {P1, P2, P3, P4});
}

PacketMeta packet(PortId in, Address src, Address dst, std::string payload = "x")
{
    PacketMeta p;
    p.in_port = in;
    p.src_addr = src;
    p.dst_addr = dst;
    p.src_port = 10000;
    p.dst_port = 5060;
    p.payload = std::move(payload);
    return p;
}

MatchFields match_src(Address a)
{
    MatchFields m;
    m.src_addr = a;
    return m;
}

// Reference scan: highest priority, then lowest rule id.
std::optional<RuleId> brute_force_lookup(std::span<const FlowRule> rules, const PacketMeta& pkt)
{
    const FlowRule* best = nullptr;
    for (const FlowRule& r : rules) {
        if (!r.match.matches(pkt))
            continue;
        if (!best || r.priority > best->priority || (r.priority == best->priority && r.id < best->id))
            best = &r;
    }
    return best ? std::optional(best->id) : std::nullopt;
}

} // namespace

TEST_CASE("install_rule")
{
    FlowSwitch sw = make_switch();
    const RuleId id = sw.install_rule(match_src(UA1), Forward{P2}, 10);
    CHECK(id == RuleId(1));
    const auto counters = sw.read_counters();
    REQUIRE(counters.size() == 1);
    CHECK(counters[0].packet_counter == 0);
    CHECK(counters[0].byte_counter == 0);

    SUBCASE("duplicate (match, priority) is refused")
    {
        try {
            sw.install_rule(match_src(UA1), Forward{P3}, 10);
            FAIL("accepted duplicate");
        } catch (const FlowTableError& e) {
            CHECK(e.kind() == FlowTableErrorKind::DuplicateExactRule);
        }
        // Same match at another priority is a different rule.
        CHECK(sw.install_rule(match_src(UA1), Forward{P3}, 11) == RuleId(2));
    }
    SUBCASE("all-wildcard match is refused")
    {
        CHECK_THROWS_AS(sw.install_rule(MatchFields{}, Drop{}, 1), FlowTableError);
    }
    SUBCASE("unknown ports are refused")
    {
        MatchFields m = match_src(UA2);
        CHECK_THROWS_AS(sw.install_rule(m, Forward{PortId(9)}, 1), FlowTableError);
        m.in_port = PortId(9);
        CHECK_THROWS_AS(sw.install_rule(m, Forward{P1}, 1), FlowTableError);
    }
}

TEST_CASE("lookup honours priority")
{
    FlowSwitch sw = make_switch();
    CHECK(sw.lookup(packet(P1, UA1, VIP)) == nullptr);

    const RuleId low = sw.install_rule(match_src(UA1), Forward{P2}, 10);
    MatchFields by_dst;
    by_dst.dst_addr = VIP;
    const RuleId high = sw.install_rule(by_dst, Forward{P3}, 20);

    const FlowRule* hit = sw.lookup(packet(P1, UA1, VIP));
    REQUIRE(hit);
    CHECK(hit->id == high);
    // Only the low rule matches here.
    hit = sw.lookup(packet(P1, UA1, Address(7)));
    REQUIRE(hit);
    CHECK(hit->id == low);

    SUBCASE("equal priority goes to the earlier rule")
    {
        FlowSwitch t = make_switch();
        const RuleId first = t.install_rule(match_src(UA1), Forward{P2}, 5);
        t.install_rule(by_dst, Forward{P3}, 5);
        CHECK(t.lookup(packet(P1, UA1, VIP))->id == first);
    }
    SUBCASE("priorities 5 and 7")
    {
        FlowSwitch t = make_switch();
        t.install_rule(match_src(UA1), Forward{P2}, 5);
        const RuleId seven = t.install_rule(by_dst, Forward{P3}, 7);
        CHECK(t.lookup(packet(P1, UA1, VIP))->id == seven);
    }
    SUBCASE("lookup leaves counters alone")
    {
        sw.lookup(packet(P1, UA1, VIP));
        for (const auto& c : sw.read_counters())
            CHECK(c.packet_counter == 0);
    }
}

TEST_CASE("process_packet")
{
    FlowSwitch sw = make_switch();

    SUBCASE("miss goes to the controller")
    {
        sw.install_rule(match_src(UA2), Forward{P2}, 1);
        const PacketMeta p = packet(P1, UA1, VIP);
        const SwitchOutcome out = sw.process_packet(p);
        REQUIRE(std::holds_alternative<PacketIn>(out));
        CHECK(std::get<PacketIn>(out).packet == p);
        CHECK_FALSE(std::get<PacketIn>(out).rule.has_value());
        CHECK(sw.read_counters()[0].packet_counter == 0);
    }
    SUBCASE("forward hit with a 300-byte payload")
    {
        const RuleId id = sw.install_rule(match_src(UA1), Forward{P2}, 1);
        const SwitchOutcome out = sw.process_packet(packet(P1, UA1, VIP, std::string(300, 'a')));
        REQUIRE(std::holds_alternative<Forwarded>(out));
        CHECK(std::get<Forwarded>(out).out_port == P2);
        CHECK(std::get<Forwarded>(out).rule == id);
        CHECK(sw.table().find(id)->packet_counter == 1);
        CHECK(sw.table().find(id)->byte_counter == 300);
    }
    SUBCASE("rewrite keeps the source")
    {
        sw.install_rule(match_src(UA1), RewriteDstAndForward{S2, 5070, P3}, 1);
        const SwitchOutcome out = sw.process_packet(packet(P1, UA1, VIP));
        REQUIRE(std::holds_alternative<Forwarded>(out));
        const PacketMeta& fwd = std::get<Forwarded>(out).packet;
        CHECK(fwd.dst_addr == S2);
        CHECK(fwd.dst_port == 5070);
        CHECK(fwd.src_addr == UA1);
        CHECK(fwd.src_port == 10000);
        CHECK(std::get<Forwarded>(out).out_port == P3);
    }
    SUBCASE("drop and explicit send-to-controller count the hit")
    {
        const RuleId drop = sw.install_rule(match_src(UA1), Drop{}, 1);
        const RuleId punt = sw.install_rule(match_src(UA2), SendToController{}, 1);
        CHECK(std::holds_alternative<Dropped>(sw.process_packet(packet(P1, UA1, VIP))));
        const SwitchOutcome out = sw.process_packet(packet(P1, UA2, VIP));
        REQUIRE(std::holds_alternative<PacketIn>(out));
        CHECK(std::get<PacketIn>(out).rule == punt);
        CHECK(sw.table().find(drop)->packet_counter == 1);
        CHECK(sw.table().find(punt)->packet_counter == 1);
    }
    SUBCASE("unknown ingress port")
    {
        CHECK_THROWS_AS(sw.process_packet(packet(PortId(42), UA1, VIP)), std::invalid_argument);
    }
}

TEST_CASE("read_counters over a scripted replay")
{
    FlowSwitch sw = make_switch();
    const RuleId a = sw.install_rule(match_src(UA1), Forward{P2}, 1);
    const RuleId b = sw.install_rule(match_src(UA2), Forward{P3}, 1);

    // 10 packets: 4 from UA1, 3 from UA2, 3 from an unknown source (misses).
    const Address order[] = {UA1, UA2, Address(5), UA1, UA1, UA2, Address(5), UA2, Address(5), UA1};
    std::size_t hits = 0;
    for (Address src : order) {
        if (!std::holds_alternative<PacketIn>(sw.process_packet(packet(P1, src, VIP, "abcd"))))
            ++hits;
    }
    std::map<RuleId, std::uint64_t> by_rule;
    std::uint64_t total = 0;
    for (const auto& c : sw.read_counters()) {
        by_rule[c.rule_id] = c.packet_counter;
        total += c.packet_counter;
    }
    CHECK(hits == 7);
    CHECK(total == 7);
    CHECK(by_rule[a] == 4);
    CHECK(by_rule[b] == 3);
    CHECK(sw.table().find(a)->byte_counter == 16);
}

TEST_CASE("remove_rule")
{
    FlowSwitch sw = make_switch();
    const RuleId id = sw.install_rule(match_src(UA1), Forward{P2}, 1);
    CHECK(sw.remove_rule(id));
    CHECK_FALSE(sw.remove_rule(id));
    CHECK(sw.lookup(packet(P1, UA1, VIP)) == nullptr);
    // Ids are never reused.
    CHECK(sw.install_rule(match_src(UA1), Forward{P2}, 1) == RuleId(2));
}

TEST_CASE("dump_flows prints one line per rule")
{
    FlowSwitch sw = make_switch();
    MatchFields m = match_src(UA1);
    m.in_port = P1;
    sw.install_rule(m, RewriteDstAndForward{S2, 5060, P3}, 100);
    sw.process_packet(packet(P1, UA1, VIP, "hello"));
    std::ostringstream os;
    sw.dump_flows(os);
    CHECK(os.str() == "id=1 priority=100 match=in_port=1,src=1001 action=set_dst:102:5060,output:3 "
                      "packets=1 bytes=5\n");
}

TEST_CASE("lookup agrees with a brute-force scan on small tables")
{
    std::mt19937_64 rng(5);
    auto small = [&](std::uint32_t n) { return static_cast<std::uint32_t>(rng() % n); };

    for (int round = 0; round < 3000; ++round) {
        FlowSwitch sw = make_switch();
        const int nrules = 1 + static_cast<int>(rng() % 5);
        for (int i = 0; i < nrules; ++i) {
            MatchFields m;
            if (rng() % 2) m.in_port = PortId(1 + small(2));
            if (rng() % 2) m.src_addr = Address(small(3));
            if (rng() % 2) m.dst_addr = Address(small(3));
            if (rng() % 2) m.src_port = static_cast<std::uint16_t>(small(2));
            if (m.is_all_wildcard()) m.dst_port = static_cast<std::uint16_t>(small(2));
            try {
                sw.install_rule(m, Forward{P2}, small(3));
            } catch (const FlowTableError& e) {
                REQUIRE(e.kind() == FlowTableErrorKind::DuplicateExactRule);
            }
        }
        for (int q = 0; q < 10; ++q) {
            PacketMeta p = packet(PortId(1 + small(2)), Address(small(3)), Address(small(3)));
            p.src_port = static_cast<std::uint16_t>(small(2));
            p.dst_port = static_cast<std::uint16_t>(small(2));
            const FlowRule* got = sw.lookup(p);
            const auto want = brute_force_lookup(sw.table().rules(), p);
            REQUIRE(want.has_value() == (got != nullptr));
            if (got) {
                CHECK(got->id == *want);
                CHECK(sw.lookup(p)->id == got->id);
            }
        }
    }
}

TEST_CASE("counters are monotone and conserve rule hits")
{
    std::mt19937_64 rng(11);
    FlowSwitch sw = make_switch();
    std::uint64_t hits = 0;
    std::map<RuleId, std::pair<std::uint64_t, std::uint64_t>> last;

    for (int step = 0; step < 5000; ++step) {
        const auto op = rng() % 10;
        if (op == 0) {
            MatchFields m = match_src(Address(static_cast<std::uint32_t>(rng() % 6)));
            try {
                sw.install_rule(m, Forward{P2}, static_cast<Priority>(rng() % 4));
            } catch (const FlowTableError&) {
            }
        } else {
            const PacketMeta p = packet(P1, Address(static_cast<std::uint32_t>(rng() % 8)), VIP,
                                        std::string(rng() % 64, 'z'));
            if (!std::holds_alternative<PacketIn>(sw.process_packet(p)))
                ++hits;
        }
        std::uint64_t sum = 0;
        for (const auto& c : sw.read_counters()) {
            auto& [pk, by] = last[c.rule_id];
            CHECK(c.packet_counter >= pk);
            CHECK(c.byte_counter >= by);
            pk = c.packet_counter;
            by = c.byte_counter;
            sum += c.packet_counter;
        }
        REQUIRE(sum == hits);
    }
}
