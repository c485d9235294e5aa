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
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sipflow/types.hpp"

namespace sipflow {

enum class CallState { Sent, Responded, Failed };

struct CallRecord {
    std::string call_id;
    std::uint32_t ua_id = 0;
    std::optional<ServerId> server_id;
    SimTime sent_at = 0;
    std::optional<SimTime> responded_at;
    CallState state = CallState::Sent;
};

struct ScenarioMeta {
    std::string scenario_name;
    std::string policy_name;
    std::uint32_t n_user_agents = 0;
    std::size_t server_count = 0;
};

struct ResponseSample {
    SimTime sent_at = 0;
    double response_time_ms = 0;
    friend bool operator==(const ResponseSample&, const ResponseSample&) = default;
};

struct MetricsReport {
    std::string scenario_name;
    std::string policy_name;
    std::uint32_t n_user_agents = 0;
    double avg_response_time_ms = 0;
    double throughput_rps = 0;
    std::map<ServerId, std::uint64_t> per_server_assignments;   // every server, zeros included
    std::vector<ResponseSample> response_time_series;
    std::uint64_t failed_count = 0;

    friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

class NonTerminalRecordError : public Error {
public:
    explicit NonTerminalRecordError(const std::string& call_id)
        : Error("call " + call_id + " has not reached a terminal state") {}
};

/// Throughput is responded calls per second over the makespan (first send to
/// last response). With no responded calls both metrics are zero.
MetricsReport compute_metrics(std::span<const CallRecord> records, const ScenarioMeta& meta);

/// One row of a policy comparison plus orderings that only make sense with
/// more than one policy.
struct ComparisonTable {
    std::vector<MetricsReport> reports;
    std::optional<bool> least_request_best_response_time;
    std::optional<bool> least_request_best_throughput;
};

ComparisonTable make_comparison(std::vector<MetricsReport> reports);

enum class ReportFormat { Json, Csv };

ReportFormat parse_report_format(std::string_view name);   // throws ConfigError

// CSV: scenario,policy,n,avg_response_time_ms,throughput_rps,failed,server_1..server_k
void write_csv(std::ostream& os, std::span<const MetricsReport> reports);
void write_series_csv(std::ostream& os, const MetricsReport& report);

std::string to_json_text(std::span<const MetricsReport> reports);
std::string to_json_text(const ComparisonTable& table);

/// Accepts the document produced by to_json_text. Throws IoError on
/// malformed input.
std::vector<MetricsReport> parse_reports_json(std::string_view text);

/// Writes to `path`, or to `fallback` when path is empty. Throws IoError.
void emit_report(std::span<const MetricsReport> reports, ReportFormat format,
                 const std::filesystem::path& path, std::ostream& fallback);
void emit_comparison(const ComparisonTable& table, ReportFormat format,
                     const std::filesystem::path& path, std::ostream& fallback);

/// Shortest representation that parses back to the same double.
std::string format_number(double v);

} // namespace sipflow
