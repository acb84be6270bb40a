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
/**
 * @file scheduler.h
 * @brief Deterministic core of the main scheduler: joins per-port parts,
 * routes each subframe to its index-matched worker and applies the
 * depth-1 drop-oldest queue rule.
 *
 * The class does no I/O and owns no threads; the pipeline feeds it control
 * words and executes the returned actions.
 */
#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <vector>

#include "rapro/server/subframe_bundle.h"

namespace rapro::server {

struct Dispatch {
  std::size_t worker = 0;
  std::unique_ptr<SubframeBundle> bundle;
};

struct SchedulerActions {
  std::vector<Dispatch> dispatches;
  /// Complete subframes discarded by the queue rule (deadline misses).
  std::vector<SubframeKey> dropped;
  /// Joins given up because some part can no longer complete.
  std::vector<SubframeKey> abandoned;
};

struct SchedulerStats {
  std::size_t dispatches = 0;
  std::size_t dropped = 0;
  std::size_t abandoned = 0;
  /// Parts that arrived for a key that was already dispatched or abandoned.
  std::size_t late_parts = 0;
  std::size_t max_queue_depth = 0;
  std::vector<std::size_t> dispatches_per_worker;  // indexed by worker id
};

class DispatchScheduler {
 public:
  /// Workers are numbered 1..num_workers; worker i serves subframe index i.
  DispatchScheduler(std::size_t num_parts, std::size_t num_antennas,
                    std::size_t num_workers);

  /// A receive worker finished its part of `buffer->key()`.
  SchedulerActions OnPartComplete(std::size_t part,
                                  std::unique_ptr<wire::SubframeBuffer> buffer,
                                  TimePoint now);
  /// A receive worker evicted its part of `key` unfinished.
  SchedulerActions OnPartIncomplete(const SubframeKey& key);
  /// Worker `worker` finished its current subframe.
  SchedulerActions OnWorkerDone(std::size_t worker);
  /// Abandons every join for frames before `frame_seq` and forgets closed
  /// keys older than that.
  SchedulerActions AbandonBefore(std::uint32_t frame_seq);
  /// Abandons every open join.
  SchedulerActions AbandonAll();

  bool busy(std::size_t worker) const { return workers_.at(worker).busy; }
  std::size_t queue_depth(std::size_t worker) const {
    return workers_.at(worker).queued ? 1 : 0;
  }
  /// No worker busy and nothing queued.
  bool Idle() const;
  std::size_t open_joins() const { return joins_.size(); }
  const SchedulerStats& stats() const { return stats_; }

 private:
  struct Join {
    std::vector<std::unique_ptr<wire::SubframeBuffer>> parts;
    std::size_t received = 0;
  };
  struct WorkerSlot {
    bool busy = false;
    std::unique_ptr<SubframeBundle> queued;
  };

  void Route(std::unique_ptr<SubframeBundle> bundle, SchedulerActions& actions);
  void Abandon(std::map<SubframeKey, Join>::iterator it, SchedulerActions& actions);

  std::size_t num_parts_;
  std::size_t num_antennas_;
  std::vector<WorkerSlot> workers_;  // index 0 unused
  std::map<SubframeKey, Join> joins_;
  std::set<SubframeKey> closed_;
  std::uint32_t floor_ = 0;  // parts for earlier frames are late
  SchedulerStats stats_;
};

}  // namespace rapro::server
