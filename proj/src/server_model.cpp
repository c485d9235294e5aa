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

#include "sipflow/server_model.hpp"

#include <algorithm>
#include <stdexcept>

namespace sipflow {

ServerModel::ServerModel(ServerId id, SimTime service_time_ms)
    : id_(id)
    , service_time_(service_time_ms)
{
    if (!(service_time_ms > 0))
        throw std::invalid_argument("service time must be positive");
}

SimTime ServerModel::accept(ServerJob job, SimTime now)
{
    busy_until_ = std::max(busy_until_, now) + service_time_;
    job.enqueued_at = now;
    job.completes_at = busy_until_;
    if (job.background)
        ++background_queued_;
    queue_.push_back(std::move(job));
    return busy_until_;
}

ServerJob ServerModel::complete(SimTime now)
{
    if (queue_.empty())
        throw std::logic_error("completion on an idle server");
    if (queue_.front().completes_at != now)
        throw std::logic_error("completion out of FIFO order");
    ServerJob job = std::move(queue_.front());
    queue_.pop_front();
    if (job.background)
        --background_queued_;
    return job;
}

std::vector<SimTime> seed_background(ServerModel& server, std::uint32_t k)
{
    if (server.queue_length() != 0 || server.busy_until() != 0)
        throw std::logic_error("background must be seeded on an idle server at t=0");
    std::vector<SimTime> completions;
    completions.reserve(k);
    for (std::uint32_t i = 0; i < k; ++i) {
        ServerJob job;
        job.background = true;
        completions.push_back(server.accept(std::move(job), 0));
    }
    return completions;
}

} // namespace sipflow
