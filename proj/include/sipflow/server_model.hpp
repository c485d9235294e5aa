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
#include <deque>
#include <optional>
#include <vector>

#include "sipflow/flow_switch.hpp"
#include "sipflow/sip_message.hpp"
#include "sipflow/types.hpp"

namespace sipflow {

struct ServerJob {
    bool background = false;
    std::optional<SipMessage> request;   // absent for background work
    Address reply_addr;
    std::uint16_t reply_port = 0;
    SimTime enqueued_at = 0;
    SimTime completes_at = 0;
};

/// Single FIFO server with deterministic service time.
class ServerModel {
public:
    ServerModel(ServerId id, SimTime service_time_ms);

    ServerId id() const { return id_; }
    SimTime service_time() const { return service_time_; }
    SimTime busy_until() const { return busy_until_; }
    std::size_t queue_length() const { return queue_.size(); }
    std::size_t background_queued() const { return background_queued_; }
    const std::deque<ServerJob>& queue() const { return queue_; }

    /// Appends the job and returns its completion time,
    /// max(busy_until, now) + service_time.
    SimTime accept(ServerJob job, SimTime now);

    /// Removes the head job, which must complete at `now`.
    ServerJob complete(SimTime now);

private:
    ServerId id_;
    SimTime service_time_;
    SimTime busy_until_ = 0;
    std::deque<ServerJob> queue_;
    std::size_t background_queued_ = 0;
};

/// Enqueues k background jobs at t=0 ahead of any scenario traffic and
/// returns their completion times.
std::vector<SimTime> seed_background(ServerModel& server, std::uint32_t k);

} // namespace sipflow
