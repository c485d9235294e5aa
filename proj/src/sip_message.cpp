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

#include "sipflow/sip_message.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <stdexcept>
#include <utility>

namespace sipflow {

namespace {

constexpr std::string_view kCrlf = "\r\n";
constexpr std::string_view kVersion = "SIP/2.0";
constexpr std::string_view kViaSentBy = "SIP/2.0/UDP sipflow.invalid";

bool is_ws(char c) { return c == ' ' || c == '\t'; }

std::string_view trim(std::string_view s)
{
    while (!s.empty() && is_ws(s.front()))
        s.remove_prefix(1);
    while (!s.empty() && is_ws(s.back()))
        s.remove_suffix(1);
    return s;
}

bool iequals(std::string_view a, std::string_view b)
{
    return a.size() == b.size() &&
           std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
               auto lower = [](char c) {
                   return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
               };
               return lower(x) == lower(y);
           });
}

bool has_any(std::string_view s, std::string_view chars)
{
    return s.find_first_of(chars) != std::string_view::npos;
}

bool is_token_char(char c)
{
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') ||
           std::string_view("-.!%*_+`'~").find(c) != std::string_view::npos;
}

bool is_token(std::string_view s)
{
    return !s.empty() && std::all_of(s.begin(), s.end(), is_token_char);
}

template <class T>
std::optional<T> parse_uint(std::string_view s)
{
    if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; }))
        return std::nullopt;
    T value{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        return std::nullopt;
    return value;
}

std::string_view reason_phrase(int code)
{
    switch (code) {
    case 100: return "Trying";
    case 180: return "Ringing";
    case 200: return "OK";
    case 400: return "Bad Request";
    case 404: return "Not Found";
    case 408: return "Request Timeout";
    case 480: return "Temporarily Unavailable";
    case 486: return "Busy Here";
    case 500: return "Server Internal Error";
    case 503: return "Service Unavailable";
    case 603: return "Decline";
    default: break;
    }
    static constexpr std::array<std::string_view, 6> by_class = {
        "Informational", "Success", "Redirection", "Client Error", "Server Error", "Global Failure"};
    return by_class[static_cast<std::size_t>(code / 100 - 1)];
}

// Header slots in the order required-header checks are reported.
enum Slot : std::size_t { kVia, kFrom, kTo, kCallId, kCSeq, kContentLength, kSlotCount };

constexpr std::array<std::string_view, kSlotCount> kSlotNames = {
    "Via", "From", "To", "Call-ID", "CSeq", "Content-Length"};

std::optional<Slot> classify_header(std::string_view name)
{
    for (std::size_t i = 0; i < kSlotCount; ++i)
        if (iequals(name, kSlotNames[i]))
            return static_cast<Slot>(i);
    // RFC 3261 compact forms.
    if (name.size() == 1) {
        switch (name[0] | 0x20) {
        case 'v': return kVia;
        case 'f': return kFrom;
        case 't': return kTo;
        case 'i': return kCallId;
        case 'l': return kContentLength;
        default: break;
        }
    }
    return std::nullopt;
}

[[noreturn]] void fail(SipParseErrorKind kind, std::string detail)
{
    throw SipParseError(kind, std::move(detail));
}

std::string extract_uri(std::string_view value, std::string_view header)
{
    std::string_view uri;
    if (auto open = value.find('<'); open != std::string_view::npos) {
        auto close = value.find('>', open + 1);
        if (close == std::string_view::npos)
            fail(SipParseErrorKind::MalformedHeader, std::string(header));
        uri = trim(value.substr(open + 1, close - open - 1));
    } else {
        uri = trim(value.substr(0, value.find(';')));
    }
    if (uri.empty())
        fail(SipParseErrorKind::MalformedHeader, std::string(header));
    return std::string(uri);
}

std::string extract_branch(std::string_view via)
{
    std::size_t pos = via.find(';');
    while (pos != std::string_view::npos) {
        std::size_t next = via.find(';', pos + 1);
        std::string_view param = trim(via.substr(pos + 1, next == std::string_view::npos ? via.npos : next - pos - 1));
        auto eq = param.find('=');
        if (iequals(trim(param.substr(0, eq)), "branch"))
            return eq == std::string_view::npos ? std::string() : std::string(trim(param.substr(eq + 1)));
        pos = next;
    }
    return {};
}

} // namespace

std::string_view to_string(SipMethod m)
{
    switch (m) {
    case SipMethod::Invite: return "INVITE";
    case SipMethod::Ack: return "ACK";
    case SipMethod::Bye: return "BYE";
    }
    return "?";
}

std::optional<SipMethod> parse_method(std::string_view token)
{
    if (token == "INVITE") return SipMethod::Invite;
    if (token == "ACK") return SipMethod::Ack;
    if (token == "BYE") return SipMethod::Bye;
    return std::nullopt;
}

SipMessage make_request(SipMethod method, std::string call_id, std::uint32_t cseq,
                        std::string from_uri, std::string to_uri, std::string via_branch)
{
    SipMessage m;
    m.method = method;
    m.call_id = std::move(call_id);
    m.cseq = CSeq{cseq, method};
    m.from_uri = std::move(from_uri);
    m.to_uri = std::move(to_uri);
    m.via_branch = std::move(via_branch);
    return m;
}

SipMessage make_response(const SipMessage& request, int status_code)
{
    SipMessage m = request;
    m.method.reset();
    m.status_code = status_code;
    m.body.clear();
    return m;
}

bool is_encodable(const SipMessage& m)
{
    constexpr std::string_view kNoWs = " \t\r\n";
    if (m.method.has_value() == m.status_code.has_value())
        return false;
    if (m.status_code && (*m.status_code < 100 || *m.status_code > 699))
        return false;
    if (m.method && m.cseq.method != *m.method)
        return false;
    if (m.cseq.number == 0)
        return false;
    if (m.call_id.empty() || has_any(m.call_id, kNoWs))
        return false;
    for (const std::string* uri : {&m.from_uri, &m.to_uri})
        if (uri->empty() || has_any(*uri, kNoWs) || has_any(*uri, "<>;"))
            return false;
    return !has_any(m.via_branch, " \t\r\n;,");
}

std::string encode(const SipMessage& m)
{
    if (!is_encodable(m))
        throw std::invalid_argument("SipMessage violates encoding invariants");

    std::string out;
    out.reserve(256 + m.body.size());
    if (m.method) {
        out.append(to_string(*m.method)).append(" ").append(m.to_uri).append(" ").append(kVersion);
    } else {
        out.append(kVersion).append(" ").append(std::to_string(*m.status_code)).append(" ")
            .append(reason_phrase(*m.status_code));
    }
    out.append(kCrlf);
    out.append("Via: ").append(kViaSentBy).append(";branch=").append(m.via_branch).append(kCrlf);
    out.append("From: <").append(m.from_uri).append(">").append(kCrlf);
    out.append("To: <").append(m.to_uri).append(">").append(kCrlf);
    out.append("Call-ID: ").append(m.call_id).append(kCrlf);
    out.append("CSeq: ").append(std::to_string(m.cseq.number)).append(" ")
        .append(to_string(m.cseq.method)).append(kCrlf);
    out.append("Content-Length: ").append(std::to_string(m.body.size())).append(kCrlf);
    out.append(kCrlf);
    out.append(m.body);
    return out;
}

std::string_view to_string(SipParseErrorKind kind)
{
    switch (kind) {
    case SipParseErrorKind::MalformedStartLine: return "MalformedStartLine";
    case SipParseErrorKind::MalformedHeader: return "MalformedHeader";
    case SipParseErrorKind::MissingRequiredHeader: return "MissingRequiredHeader";
    case SipParseErrorKind::UnsupportedMethod: return "UnsupportedMethod";
    case SipParseErrorKind::BadContentLength: return "BadContentLength";
    }
    return "?";
}

SipParseError::SipParseError(SipParseErrorKind kind, std::string detail)
    : Error(std::string(to_string(kind)) + (detail.empty() ? "" : ": " + detail))
    , kind_(kind)
    , detail_(std::move(detail))
{
}

SipMessage decode(std::string_view raw)
{
    const std::size_t head_end = raw.find("\r\n\r\n");
    std::string_view head = head_end == std::string_view::npos ? raw : raw.substr(0, head_end);

    std::size_t line_end = head.find(kCrlf);
    std::string_view start = head.substr(0, line_end);
    std::string_view header_block =
        line_end == std::string_view::npos ? std::string_view() : head.substr(line_end + 2);

    SipMessage msg;

    if (start.substr(0, 4) == "SIP/") {
        auto sp1 = start.find(' ');
        if (sp1 == std::string_view::npos || start.substr(0, sp1) != kVersion)
            fail(SipParseErrorKind::MalformedStartLine, std::string(start));
        auto sp2 = start.find(' ', sp1 + 1);
        auto code_text = start.substr(sp1 + 1, sp2 == std::string_view::npos ? start.npos : sp2 - sp1 - 1);
        auto code = parse_uint<int>(code_text);
        if (code_text.size() != 3 || !code || *code < 100 || *code > 699)
            fail(SipParseErrorKind::MalformedStartLine, std::string(start));
        msg.status_code = *code;
    } else {
        auto sp1 = start.find(' ');
        auto sp2 = sp1 == std::string_view::npos ? sp1 : start.find(' ', sp1 + 1);
        if (sp2 == std::string_view::npos || start.find(' ', sp2 + 1) != std::string_view::npos)
            fail(SipParseErrorKind::MalformedStartLine, std::string(start));
        auto method_token = start.substr(0, sp1);
        auto request_uri = start.substr(sp1 + 1, sp2 - sp1 - 1);
        if (!is_token(method_token) || request_uri.empty() || start.substr(sp2 + 1) != kVersion)
            fail(SipParseErrorKind::MalformedStartLine, std::string(start));
        auto method = parse_method(method_token);
        if (!method)
            fail(SipParseErrorKind::UnsupportedMethod, std::string(method_token));
        msg.method = *method;
    }

    std::array<std::optional<std::string_view>, kSlotCount> slots{};
    while (!header_block.empty()) {
        std::size_t eol = header_block.find(kCrlf);
        std::string_view line = header_block.substr(0, eol);
        header_block = eol == std::string_view::npos ? std::string_view() : header_block.substr(eol + 2);

        auto colon = line.find(':');
        if (colon == std::string_view::npos)
            fail(SipParseErrorKind::MalformedHeader, std::string(line));
        // Whitespace may precede the colon but not the name.
        auto name = line.substr(0, colon);
        while (!name.empty() && is_ws(name.back()))
            name.remove_suffix(1);
        if (!is_token(name))
            fail(SipParseErrorKind::MalformedHeader, std::string(line));
        if (auto slot = classify_header(name); slot && !slots[*slot])
            slots[*slot] = trim(line.substr(colon + 1));
    }

    if (head_end == std::string_view::npos)
        fail(SipParseErrorKind::MalformedHeader, "unterminated header section");

    for (std::size_t i = 0; i < kSlotCount; ++i)
        if (!slots[i])
            fail(SipParseErrorKind::MissingRequiredHeader, std::string(kSlotNames[i]));

    msg.via_branch = extract_branch(*slots[kVia]);
    msg.from_uri = extract_uri(*slots[kFrom], kSlotNames[kFrom]);
    msg.to_uri = extract_uri(*slots[kTo], kSlotNames[kTo]);

    msg.call_id = std::string(*slots[kCallId]);
    if (msg.call_id.empty())
        fail(SipParseErrorKind::MalformedHeader, "Call-ID");

    {
        std::string_view cseq = *slots[kCSeq];
        auto sp = cseq.find_first_of(" \t");
        if (sp == std::string_view::npos)
            fail(SipParseErrorKind::MalformedHeader, "CSeq");
        auto number = parse_uint<std::uint32_t>(cseq.substr(0, sp));
        if (!number || *number == 0)
            fail(SipParseErrorKind::MalformedHeader, "CSeq");
        auto method_token = trim(cseq.substr(sp));
        auto method = parse_method(method_token);
        if (!method)
            fail(SipParseErrorKind::UnsupportedMethod, std::string(method_token));
        if (msg.method && *method != *msg.method)
            fail(SipParseErrorKind::MalformedHeader, "CSeq");
        msg.cseq = CSeq{*number, *method};
    }

    std::string_view body = raw.substr(head_end + 4);
    auto length = parse_uint<std::size_t>(*slots[kContentLength]);
    if (!length || *length != body.size())
        fail(SipParseErrorKind::BadContentLength, std::string(*slots[kContentLength]));
    msg.body = std::string(body);

    return msg;
}

} // namespace sipflow
