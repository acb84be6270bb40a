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
 * @file streamer.h
 * @brief Paced packet streaming of synthesized uplink frames.
 */
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "rapro/common/transport.h"
#include "rapro/config/system_config.h"

namespace rapro::frontend {

/// Deliberate transport faults, used by the pipeline contract tests.
struct FaultInjection {
  double drop_probability = 0.0;
  double duplicate_probability = 0.0;
  std::uint64_t seed = 0x6661756cULL;
  /// Stop sending after this many datagrams, as if the link died.
  std::optional<std::size_t> stop_after_packets;
  /// Drop the first data packet of each listed (frame_seq, subframe_idx).
  std::vector<std::pair<std::uint32_t, std::uint8_t>> drop_one_packet_of;
};

struct StreamOptions {
  /// 1.0 streams 10 ms frames; 0.1 streams 100 ms frames.
  double realtime_factor = 1.0;
  std::size_t num_frames = 0;
  std::uint32_t first_frame_seq = 0;
  /// Fraction of each subframe slot over which its packets are spread.
  double slot_fill = 0.8;
  FaultInjection faults;
};

struct PacingStats {
  std::size_t samples = 0;
  double mean = 0.0;  // fractions of the frame period
  double p50 = 0.0;
  double p90 = 0.0;
  double p99 = 0.0;
  double max = 0.0;
  /// Subframes whose last packet left after the end of their slot.
  std::size_t overruns = 0;
};

/// Configuration and seeds sufficient to regenerate every transmitted bit
/// and channel matrix.
struct GroundTruth {
  SystemConfig config;
  std::uint32_t first_frame_seq = 0;
  std::size_t num_frames = 0;
  std::string link_fingerprint;
};

struct StreamReport {
  std::size_t frames_sent = 0;
  std::size_t packets_sent = 0;
  std::size_t marker_packets = 0;
  std::size_t bytes_sent = 0;
  std::size_t payload_bytes = 0;
  std::size_t header_bytes = 0;
  std::size_t marker_bytes = 0;
  std::size_t send_failures = 0;
  std::size_t dropped_by_fault = 0;
  std::size_t duplicated_by_fault = 0;
  bool stopped_early = false;
  double realtime_factor = 1.0;
  double frame_period_s = 0.0;
  double wall_time_s = 0.0;
  PacingStats pacing;
  GroundTruth truth;
};

nlohmann::json ToJson(const StreamReport& report);
StreamReport StreamReportFromJson(const nlohmann::json& j);

/// Streams `options.num_frames` frames into `sink`. Antenna m's packets take
/// route m % sink.num_routes(); frame markers go to every route. Throws
/// ConfigError on a bad realtime factor. Pacing overruns are reported, not
/// thrown.
StreamReport StreamFrames(const SystemConfig& config, const StreamOptions& options,
                          DatagramSink& sink);

}  // namespace rapro::frontend
