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
 * @file pipeline.h
 * @brief The baseband server: receive workers, main scheduler, one worker
 * per subframe index and a transmit worker.
 *
 * Threads communicate only through their own inboxes. Receive workers hand
 * completed per-port buffers to the scheduler, the scheduler hands joined
 * bundles to subframe workers, and results travel back through the
 * scheduler to the transmit worker.
 */
#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "rapro/common/stats.h"
#include "rapro/common/transport.h"
#include "rapro/config/system_config.h"
#include "rapro/server/process_subframe.h"
#include "rapro/server/scheduler.h"

namespace rapro::server {

enum class AffinityPolicy { kNone, kOneCorePerWorker };
std::string_view ToString(AffinityPolicy p);
AffinityPolicy ParseAffinityPolicy(std::string_view name);

struct PipelineConfig {
  std::size_t num_receive_workers = 2;
  std::vector<Endpoint> listen;
  std::optional<Endpoint> output;
  /// Scales the frame period: the deadline defaults to frame_duration / rtf.
  double realtime_factor = 1.0;
  std::optional<double> deadline_s;
  AffinityPolicy affinity = AffinityPolicy::kNone;
  /// Stop once this many frames have a final outcome.
  std::optional<std::size_t> frame_budget;
  std::optional<double> duration_s;
  /// Stop after this long without packets, once any packet has arrived.
  double idle_timeout_s = 2.0;
  /// Stop if no packet at all arrives within this long.
  std::optional<double> startup_timeout_s;
  std::uint32_t window_frames = 2;
  /// Append equalized symbols to result datagrams.
  bool dump_symbols = true;
  std::optional<std::filesystem::path> capture_path;
  /// Score detections against payloads regenerated from the config seeds.
  bool score_truth = false;

  double FramePeriod(const FrameConfig& cfg) const {
    return cfg.frame_duration / realtime_factor;
  }
  double Deadline(const FrameConfig& cfg) const {
    return deadline_s ? *deadline_s : FramePeriod(cfg);
  }
  void Validate() const;
};

using SubframeProcessor = std::function<DetectionResult(const SubframeBundle&)>;

enum class SubframeOutcome { kPending, kInFlight, kProcessed, kLate, kDropped, kIncomplete };
std::string_view ToString(SubframeOutcome o);

struct WorkerTimeline {
  std::string name;
  double wall_s = 0.0;
  double busy_s = 0.0;
  double idle_s = 0.0;
  std::size_t jobs = 0;
  std::vector<double> durations_s;
  /// Start of each job relative to the run start.
  std::vector<double> starts_s;
  std::size_t deadline_misses = 0;
};

struct IncompleteRecord {
  SubframeKey key;
  std::vector<wire::FragmentId> missing;
};

struct FrameRecord {
  std::uint32_t frame_seq = 0;
  std::vector<SubframeOutcome> subframes;  // index 0 unused
  double first_packet_s = 0.0;             // relative to the run start
  std::optional<double> latency_s;         // first packet in -> last result out
  std::string outcome;                     // completed | with_misses | incomplete
};

struct UserScore {
  std::size_t user = 0;
  Modulation modulation = Modulation::kQpsk;
  std::size_t bits = 0;
  std::size_t bit_errors = 0;
  double ber = 0.0;
  double evm_percent = 0.0;
  double decision_evm_percent = 0.0;
};

struct ServerReport {
  std::string link_fingerprint;
  Seeds seeds;
  double frame_period_s = 0.0;
  double deadline_s = 0.0;
  double wall_time_s = 0.0;
  std::string stop_reason;

  std::size_t frames_in = 0;
  std::size_t frames_completed = 0;
  std::size_t frames_with_misses = 0;
  std::size_t frames_incomplete = 0;

  std::size_t subframes_processed = 0;
  std::size_t subframes_late = 0;
  std::size_t subframes_dropped = 0;
  std::size_t subframes_incomplete = 0;
  std::size_t processing_errors = 0;
  std::vector<SubframeKey> late;
  std::vector<SubframeKey> dropped;
  std::vector<IncompleteRecord> incomplete;

  std::size_t datagrams_received = 0;
  std::size_t malformed = 0;
  std::size_t truncated = 0;
  std::size_t range_errors = 0;
  wire::AssemblerStats assembly;  // summed over receive workers
  SchedulerStats scheduler;
  std::size_t index_affinity_violations = 0;

  std::vector<WorkerTimeline> receive_workers;
  std::vector<WorkerTimeline> subframe_workers;  // worker i at index i - 1
  WorkerTimeline transmit_worker;
  std::vector<FrameRecord> frames;

  Summary processing_time_s;
  Summary latency_s;
  std::optional<double> mean_tsc_cycles;
  double mean_derived_cycles = 0.0;
  /// Mean processing time over the frame period.
  double predicted_duty = 0.0;
  /// Busy fraction per subframe worker over its steady-state span.
  std::vector<std::optional<double>> measured_duty;
  std::optional<double> measured_duty_mean;

  std::size_t result_datagrams = 0;
  std::size_t result_bytes = 0;
  std::size_t result_send_failures = 0;

  bool truth_scored = false;
  std::vector<UserScore> users;

  /// frames_in == completed + with_misses + incomplete.
  bool AccountingHolds() const {
    return frames_in == frames_completed + frames_with_misses + frames_incomplete;
  }
};

nlohmann::json ToJson(const ServerReport& report);

class Pipeline {
 public:
  /// `sources[r]` feeds receive worker r, which owns antennas with
  /// m % sources.size() == r. `output` may be null.
  Pipeline(SystemConfig config, PipelineConfig pipeline,
           std::vector<std::unique_ptr<DatagramSource>> sources,
           DatagramSink* output = nullptr, SubframeProcessor processor = {});
  ~Pipeline();
  Pipeline(const Pipeline&) = delete;
  Pipeline& operator=(const Pipeline&) = delete;

  /// Runs until a stop condition, drains in-flight work and reports.
  ServerReport Run();

  /// Requests a graceful drain. Async-signal-safe.
  void RequestStop() { stop_requested_.store(true, std::memory_order_relaxed); }

  /// Also drain once `*flag` becomes true. The flag must outlive Run().
  void WatchStopFlag(const std::atomic<bool>* flag) { external_stop_ = flag; }

 private:
  struct Impl;
  bool StopRequested() const;

  std::unique_ptr<Impl> impl_;
  std::atomic<bool> stop_requested_{false};
  const std::atomic<bool>* external_stop_ = nullptr;
};

/// Binds UDP sockets per `pipeline.listen` (TransportError on failure),
/// runs a Pipeline and returns its report. `stop` may be set from a signal
/// handler to drain early.
ServerReport RunServer(const SystemConfig& config, const PipelineConfig& pipeline,
                       const std::atomic<bool>* stop = nullptr);

}  // namespace rapro::server
