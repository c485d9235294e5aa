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

#include "sipflow/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "sipflow/policy.hpp"

namespace sipflow {

using ordered_json = nlohmann::ordered_json;

MetricsReport compute_metrics(std::span<const CallRecord> records, const ScenarioMeta& meta)
{
    MetricsReport report;
    report.scenario_name = meta.scenario_name;
    report.policy_name = meta.policy_name;
    report.n_user_agents = meta.n_user_agents;
    for (std::size_t i = 1; i <= meta.server_count; ++i)
        report.per_server_assignments[ServerId(static_cast<std::uint32_t>(i))] = 0;

    double sum = 0;
    SimTime first_send = std::numeric_limits<SimTime>::infinity();
    SimTime last_response = -std::numeric_limits<SimTime>::infinity();

    for (const CallRecord& r : records) {
        switch (r.state) {
        case CallState::Sent:
            throw NonTerminalRecordError(r.call_id);
        case CallState::Failed:
            ++report.failed_count;
            break;
        case CallState::Responded: {
            const double rt = *r.responded_at - r.sent_at;
            report.response_time_series.push_back(ResponseSample{r.sent_at, rt});
            sum += rt;
            first_send = std::min(first_send, r.sent_at);
            last_response = std::max(last_response, *r.responded_at);
            if (r.server_id)
                ++report.per_server_assignments[*r.server_id];
            break;
        }
        }
    }

    const auto responded = report.response_time_series.size();
    if (responded > 0) {
        report.avg_response_time_ms = sum / static_cast<double>(responded);
        const double makespan_s = (last_response - first_send) / 1000.0;
        report.throughput_rps = makespan_s > 0 ? static_cast<double>(responded) / makespan_s : 0.0;
    }
    return report;
}

ComparisonTable make_comparison(std::vector<MetricsReport> reports)
{
    ComparisonTable table;
    table.reports = std::move(reports);
    if (table.reports.size() < 2)
        return table;

    auto lr = std::find_if(table.reports.begin(), table.reports.end(), [](const MetricsReport& r) {
        return r.policy_name == kLeastRequestPolicyName;
    });
    if (lr == table.reports.end())
        return table;

    bool best_rt = true;
    bool best_tp = true;
    for (auto it = table.reports.begin(); it != table.reports.end(); ++it) {
        if (it == lr)
            continue;
        best_rt = best_rt && lr->avg_response_time_ms < it->avg_response_time_ms;
        best_tp = best_tp && lr->throughput_rps > it->throughput_rps;
    }
    table.least_request_best_response_time = best_rt;
    table.least_request_best_throughput = best_tp;
    return table;
}

ReportFormat parse_report_format(std::string_view name)
{
    if (name == "json")
        return ReportFormat::Json;
    if (name == "csv")
        return ReportFormat::Csv;
    throw ConfigError("unknown format '" + std::string(name) + "' (expected json or csv)");
}

std::string format_number(double v)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

void write_csv(std::ostream& os, std::span<const MetricsReport> reports)
{
    std::size_t servers = 0;
    for (const MetricsReport& r : reports)
        servers = std::max(servers, r.per_server_assignments.size());

    os << "scenario,policy,n,avg_response_time_ms,throughput_rps,failed";
    for (std::size_t i = 1; i <= servers; ++i)
        os << ",server_" << i;
    os << '\n';

    for (const MetricsReport& r : reports) {
        os << r.scenario_name << ',' << r.policy_name << ',' << r.n_user_agents << ','
           << format_number(r.avg_response_time_ms) << ',' << format_number(r.throughput_rps) << ','
           << r.failed_count;
        for (std::size_t i = 1; i <= servers; ++i) {
            auto it = r.per_server_assignments.find(ServerId(static_cast<std::uint32_t>(i)));
            os << ',' << (it == r.per_server_assignments.end() ? 0 : it->second);
        }
        os << '\n';
    }
}

void write_series_csv(std::ostream& os, const MetricsReport& report)
{
    os << "sent_at_ms,response_time_ms\n";
    for (const ResponseSample& s : report.response_time_series)
        os << format_number(s.sent_at) << ',' << format_number(s.response_time_ms) << '\n';
}

namespace {

ordered_json report_to_json(const MetricsReport& r)
{
    ordered_json j;
    j["scenario_name"] = r.scenario_name;
    j["policy_name"] = r.policy_name;
    j["n_user_agents"] = r.n_user_agents;
    j["avg_response_time_ms"] = r.avg_response_time_ms;
    j["throughput_rps"] = r.throughput_rps;
    ordered_json per_server = ordered_json::object();
    for (const auto& [id, count] : r.per_server_assignments)
        per_server[std::to_string(id.value)] = count;
    j["per_server_assignments"] = std::move(per_server);
    ordered_json series = ordered_json::array();
    for (const ResponseSample& s : r.response_time_series)
        series.push_back(ordered_json::array({s.sent_at, s.response_time_ms}));
    j["response_time_series"] = std::move(series);
    j["failed_count"] = r.failed_count;
    return j;
}

MetricsReport report_from_json(const ordered_json& j)
{
    MetricsReport r;
    r.scenario_name = j.at("scenario_name").get<std::string>();
    r.policy_name = j.at("policy_name").get<std::string>();
    r.n_user_agents = j.at("n_user_agents").get<std::uint32_t>();
    r.avg_response_time_ms = j.at("avg_response_time_ms").get<double>();
    r.throughput_rps = j.at("throughput_rps").get<double>();
    for (const auto& [key, value] : j.at("per_server_assignments").items())
        r.per_server_assignments[ServerId(static_cast<std::uint32_t>(std::stoul(key)))] =
            value.get<std::uint64_t>();
    for (const auto& sample : j.at("response_time_series"))
        r.response_time_series.push_back(
            ResponseSample{sample.at(0).get<double>(), sample.at(1).get<double>()});
    r.failed_count = j.at("failed_count").get<std::uint64_t>();
    return r;
}

void write_text(const std::filesystem::path& path, std::ostream& fallback, const std::string& text)
{
    if (path.empty()) {
        fallback << text;
        return;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot open '" + path.string() + "' for writing");
    out << text;
    out.flush();
    if (!out)
        throw IoError("write to '" + path.string() + "' failed");
}

} // namespace

std::string to_json_text(std::span<const MetricsReport> reports)
{
    ordered_json doc;
    doc["reports"] = ordered_json::array();
    for (const MetricsReport& r : reports)
        doc["reports"].push_back(report_to_json(r));
    return doc.dump(2) + "\n";
}

std::string to_json_text(const ComparisonTable& table)
{
    ordered_json doc;
    doc["reports"] = ordered_json::array();
    for (const MetricsReport& r : table.reports)
        doc["reports"].push_back(report_to_json(r));
    if (table.least_request_best_response_time)
        doc["least_request_best_response_time"] = *table.least_request_best_response_time;
    if (table.least_request_best_throughput)
        doc["least_request_best_throughput"] = *table.least_request_best_throughput;
    return doc.dump(2) + "\n";
}

std::vector<MetricsReport> parse_reports_json(std::string_view text)
{
    try {
        const ordered_json doc = ordered_json::parse(text);
        std::vector<MetricsReport> out;
        for (const auto& r : doc.at("reports"))
            out.push_back(report_from_json(r));
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("malformed report document: ") + e.what());
    } catch (const std::logic_error& e) {
        throw IoError(std::string("malformed report document: ") + e.what());
    }
}

void emit_report(std::span<const MetricsReport> reports, ReportFormat format,
                 const std::filesystem::path& path, std::ostream& fallback)
{
    if (format == ReportFormat::Json) {
        write_text(path, fallback, to_json_text(reports));
    } else {
        std::ostringstream os;
        write_csv(os, reports);
        write_text(path, fallback, os.str());
    }
}

void emit_comparison(const ComparisonTable& table, ReportFormat format,
                     const std::filesystem::path& path, std::ostream& fallback)
{
    if (format == ReportFormat::Json) {
        write_text(path, fallback, to_json_text(table));
    } else {
        std::ostringstream os;
        write_csv(os, table.reports);
        write_text(path, fallback, os.str());
    }
}

} // namespace sipflow
