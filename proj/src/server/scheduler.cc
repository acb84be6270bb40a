/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The RaPro Authors. All rights reserved.
 * SPDX-License-Identifier: Apache-2.0
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
#include "rapro/server/scheduler.h"

#include <algorithm>
#include <string>

#include "rapro/common/error.h"

namespace rapro::server {

DispatchScheduler::DispatchScheduler(std::size_t num_parts, std::size_t num_antennas,
                                     std::size_t num_workers)
    : num_parts_(num_parts), num_antennas_(num_antennas), workers_(num_workers + 1) {
  if (num_parts == 0 || num_workers == 0) {
    throw ConfigError("scheduler needs at least one part and one worker");
  }
  stats_.dispatches_per_worker.assign(num_workers + 1, 0);
}

SchedulerActions DispatchScheduler::OnPartComplete(
    std::size_t part, std::unique_ptr<wire::SubframeBuffer> buffer, TimePoint now) {
  SchedulerActions actions;
  if (part >= num_parts_ || !buffer) throw InternalError("bad part handoff");
  const SubframeKey key = buffer->key();
  if (key.frame_seq < floor_ || closed_.contains(key)) {
    ++stats_.late_parts;
    return actions;
  }
  Join& join = joins_[key];
  if (join.parts.empty()) join.parts.resize(num_parts_);
  if (join.parts[part]) throw InternalError("part delivered twice for one subframe");
  join.parts[part] = std::move(buffer);
  if (++join.received < num_parts_) return actions;

  auto parts = std::move(join.parts);
  joins_.erase(key);
  closed_.insert(key);
  Route(std::make_unique<SubframeBundle>(key, std::move(parts), num_antennas_, now),
        actions);
  return actions;
}

SchedulerActions DispatchScheduler::OnPartIncomplete(const SubframeKey& key) {
  SchedulerActions actions;
  auto it = joins_.find(key);
  if (it != joins_.end()) {
    Abandon(it, actions);
  } else if (key.frame_seq >= floor_ && closed_.insert(key).second) {
    // No other part has shown up yet; any that does is already too late.
    actions.abandoned.push_back(key);
    ++stats_.abandoned;
  }
  return actions;
}

SchedulerActions DispatchScheduler::OnWorkerDone(std::size_t worker) {
  SchedulerActions actions;
  WorkerSlot& w = workers_.at(worker);
  if (!w.busy) throw InternalError("worker " + std::to_string(worker) + " was idle");
  w.busy = false;
  if (w.queued) {
    w.busy = true;
    ++stats_.dispatches;
    ++stats_.dispatches_per_worker[worker];
    actions.dispatches.push_back({worker, std::move(w.queued)});
  }
  return actions;
}

SchedulerActions DispatchScheduler::AbandonBefore(std::uint32_t frame_seq) {
  SchedulerActions actions;
  floor_ = std::max(floor_, frame_seq);
  while (!joins_.empty() && joins_.begin()->first.frame_seq < frame_seq) {
    Abandon(joins_.begin(), actions);
  }
  closed_.erase(closed_.begin(), closed_.lower_bound(SubframeKey{frame_seq, 0}));
  return actions;
}

SchedulerActions DispatchScheduler::AbandonAll() {
  SchedulerActions actions;
  while (!joins_.empty()) Abandon(joins_.begin(), actions);
  return actions;
}

bool DispatchScheduler::Idle() const {
  for (const WorkerSlot& w : workers_) {
    if (w.busy || w.queued) return false;
  }
  return true;
}

void DispatchScheduler::Route(std::unique_ptr<SubframeBundle> bundle,
                              SchedulerActions& actions) {
  const std::size_t worker = bundle->key().subframe_idx;
  if (worker == 0 || worker >= workers_.size()) {
    throw InternalError("no worker for subframe index " + std::to_string(worker));
  }
  WorkerSlot& w = workers_[worker];
  if (!w.busy) {
    w.busy = true;
    ++stats_.dispatches;
    ++stats_.dispatches_per_worker[worker];
    actions.dispatches.push_back({worker, std::move(bundle)});
    return;
  }
  if (w.queued) {
    actions.dropped.push_back(w.queued->key());
    ++stats_.dropped;
  }
  w.queued = std::move(bundle);
  stats_.max_queue_depth = std::max<std::size_t>(stats_.max_queue_depth, 1);
}

void DispatchScheduler::Abandon(std::map<SubframeKey, Join>::iterator it,
                                SchedulerActions& actions) {
  actions.abandoned.push_back(it->first);
  closed_.insert(it->first);
  ++stats_.abandoned;
  joins_.erase(it);
}

}  // namespace rapro::server
