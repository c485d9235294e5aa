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
#include <optional>
#include <string>
#include <string_view>

#include "sipflow/types.hpp"

namespace sipflow {

enum class SipMethod { Invite, Ack, Bye };

std::string_view to_string(SipMethod m);
std::optional<SipMethod> parse_method(std::string_view token);

struct CSeq {
    std::uint32_t number = 1;
    SipMethod method = SipMethod::Invite;

    friend bool operator==(const CSeq&, const CSeq&) = default;
};

/**
 * Minimal SIP message: enough to identify a dialog (Call-ID), order its
 * transactions (CSeq) and route it (From/To/Via).
 *
 * Exactly one of `method` (requests) and `status_code` (responses) is set.
 * Unknown headers are not represented; decoding drops them.
 */
struct SipMessage {
    std::optional<SipMethod> method;
    std::optional<int> status_code;
    std::string call_id;
    CSeq cseq;
    std::string from_uri;
    std::string to_uri;
    std::string via_branch;
    std::string body;

    bool is_request() const { return method.has_value(); }
    bool is_response() const { return status_code.has_value(); }

    friend bool operator==(const SipMessage&, const SipMessage&) = default;
};

SipMessage make_request(SipMethod method, std::string call_id, std::uint32_t cseq,
                        std::string from_uri, std::string to_uri, std::string via_branch);

/// Builds a response answering `request`, copying its dialog identifiers.
SipMessage make_response(const SipMessage& request, int status_code);

/// True when `msg` satisfies every invariant encode() relies on.
bool is_encodable(const SipMessage& msg);

/// Serializes to RFC 3261 text framing with CRLF line endings.
/// Throws std::invalid_argument if !is_encodable(msg).
std::string encode(const SipMessage& msg);

enum class SipParseErrorKind {
    MalformedStartLine,
    MalformedHeader,
    MissingRequiredHeader,
    UnsupportedMethod,
    BadContentLength,
};

std::string_view to_string(SipParseErrorKind kind);

class SipParseError : public Error {
public:
    SipParseError(SipParseErrorKind kind, std::string detail);

    SipParseErrorKind kind() const noexcept { return kind_; }
    // Header name for MissingRequiredHeader / MalformedHeader, otherwise context.
    const std::string& detail() const noexcept { return detail_; }

private:
    SipParseErrorKind kind_;
    std::string detail_;
};

/// Parses one message. Throws SipParseError describing the first failure.
SipMessage decode(std::string_view raw);

} // namespace sipflow
