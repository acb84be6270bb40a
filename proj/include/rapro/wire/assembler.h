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
 * @file assembler.h
 * @brief Out-of-order reassembly of sample packets into subframe buffers.
 *
 * Each (frame_seq, subframe_idx) gets one buffer with a fill bitmap per
 * (antenna, symbol, fragment). The buffer is handed out exactly once, when
 * its bitmap fills. Frames older than the active window (newest - 1 for the
 * default window of two frames) are stale; advancing the window evicts any
 * unfinished buffers as incomplete.
 */
#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "rapro/phy/frame_config.h"
#include "rapro/phy/resource_grid.h"
#include "rapro/wire/packet.h"

namespace rapro::wire {

using Clock = std::chrono::steady_clock;
using TimePoint = Clock::time_point;

struct SubframeKey {
  std::uint32_t frame_seq = 0;
  std::uint8_t subframe_idx = 0;
  auto operator<=>(const SubframeKey&) const = default;
};

struct FragmentId {
  std::uint8_t antenna = 0;  // global antenna index
  std::uint8_t symbol = 0;   // symbol within the subframe, slot-major
  std::uint16_t fragment = 0;
  auto operator<=>(const FragmentId&) const = default;
};

/// Reassembled samples of one subframe for the antennas routed to one
/// receive port. grid() rows are local antenna indices; antennas() maps them
/// to global indices.
class SubframeBuffer {
 public:
  enum class Owner : std::uint8_t { kAssembler, kProcessing };

  SubframeBuffer(SubframeKey key, std::vector<std::uint8_t> antennas,
                 std::size_t symbols, std::size_t subcarriers,
                 std::size_t samples_per_packet, TimePoint now);

  const SubframeKey& key() const { return key_; }
  const std::vector<std::uint8_t>& antennas() const { return antennas_; }
  const ResourceGrid& grid() const { return grid_; }
  std::size_t fragments_per_row() const { return fragments_per_row_; }
  std::size_t expected_fragments() const { return filled_.size(); }
  std::size_t received_fragments() const { return received_; }
  bool complete() const { return received_ == filled_.size(); }
  std::size_t payload_bytes() const { return payload_bytes_; }
  TimePoint first_arrival() const { return first_arrival_; }
  TimePoint last_arrival() const { return last_arrival_; }
  std::vector<FragmentId> Missing() const;

  Owner owner() const { return owner_; }
  /// Marks the buffer as handed to a processing worker. Writes after this
  /// point trip an assertion in debug builds.
  void ReleaseToProcessing() { owner_ = Owner::kProcessing; }

 private:
  friend class Assembler;

  /// Returns false if the fragment was already present.
  bool Write(std::size_t local_antenna, std::size_t symbol,
             std::size_t fragment, std::span<const cdouble> samples,
             TimePoint now);

  SubframeKey key_;
  std::vector<std::uint8_t> antennas_;
  ResourceGrid grid_;
  std::size_t samples_per_packet_;
  std::size_t fragments_per_row_;
  std::vector<std::uint8_t> filled_;
  std::size_t received_ = 0;
  std::size_t payload_bytes_ = 0;
  TimePoint first_arrival_;
  TimePoint last_arrival_;
  Owner owner_ = Owner::kAssembler;
};

struct AssemblerConfig {
  WireLimits limits;
  std::size_t samples_per_packet = kDefaultSamplesPerPacket;
  /// This assembler owns antennas m with m % antenna_stride == antenna_offset.
  std::size_t antenna_stride = 1;
  std::size_t antenna_offset = 0;
  std::uint32_t window_frames = 2;

  static AssemblerConfig From(const FrameConfig& cfg,
                              std::size_t samples_per_packet,
                              std::size_t antenna_stride = 1,
                              std::size_t antenna_offset = 0);
  std::vector<std::uint8_t> OwnedAntennas() const;
  std::size_t SymbolsPerSubframe() const {
    return limits.slots_per_subframe * limits.symbols_per_slot;
  }
};

enum class FeedEvent {
  kAccepted,
  kSubframeComplete,
  kDuplicate,
  kStale,
  kMarkerSeen,
};

std::string_view ToString(FeedEvent e);

struct IncompleteSubframe {
  SubframeKey key;
  std::vector<FragmentId> missing;
  std::size_t received_fragments = 0;
  std::size_t expected_fragments = 0;
  std::size_t payload_bytes = 0;
};

struct FeedOutcome {
  FeedEvent event = FeedEvent::kAccepted;
  /// Set only for kSubframeComplete; ownership passes to the caller.
  std::unique_ptr<SubframeBuffer> completed;
  /// Buffers pushed out of the window by this packet.
  std::vector<IncompleteSubframe> evicted;
};

struct AssemblerStats {
  std::size_t packets = 0;
  std::size_t accepted = 0;
  std::size_t duplicates = 0;
  std::size_t stale = 0;
  std::size_t markers = 0;
  std::size_t completed_subframes = 0;
  std::size_t incomplete_subframes = 0;
  std::size_t accepted_payload_bytes = 0;
  std::size_t completed_payload_bytes = 0;
  std::size_t incomplete_payload_bytes = 0;
};

/// Single-writer reassembly state for one packet stream.
class Assembler {
 public:
  explicit Assembler(AssemblerConfig config);

  /// Range violations throw WireError(kRange) and leave the state untouched.
  FeedOutcome Feed(const SampleHeader& header, std::span<const cdouble> samples,
                   TimePoint now);
  FeedOutcome Feed(const DecodedPacket& packet, TimePoint now) {
    return Feed(packet.header, packet.samples, now);
  }

  /// Missing-fragment report for every unfinished buffer (non-destructive).
  std::vector<IncompleteSubframe> Pending() const;
  /// Evicts unfinished buffers whose last packet arrived before `cutoff`.
  std::vector<IncompleteSubframe> ExpireOlderThan(TimePoint cutoff);
  /// Evicts every unfinished buffer.
  std::vector<IncompleteSubframe> Drain();

  std::optional<std::uint32_t> newest_frame() const { return newest_; }
  const AssemblerStats& stats() const { return stats_; }
  const AssemblerConfig& config() const { return config_; }

 private:
  bool IsStale(std::uint32_t frame_seq) const;
  void AdvanceTo(std::uint32_t frame_seq, std::vector<IncompleteSubframe>& evicted);
  void Reset(std::uint32_t frame_seq, std::vector<IncompleteSubframe>& evicted);
  IncompleteSubframe Evict(const SubframeBuffer& buf);

  AssemblerConfig config_;
  std::vector<std::uint8_t> owned_;
  std::vector<int> local_index_;  // global antenna -> row, -1 if not owned
  std::optional<std::uint32_t> newest_;
  std::map<SubframeKey, std::unique_ptr<SubframeBuffer>> pending_;
  std::set<SubframeKey> closed_;  // completed or expired keys still in the window
  AssemblerStats stats_;
};

}  // namespace rapro::wire
