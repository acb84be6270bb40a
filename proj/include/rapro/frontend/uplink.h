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
 * @file uplink.h
 * @brief Uplink frame construction and the seeded ground truth behind it.
 *
 * Per-user frame grids hold SymbolsPerFrame() symbols: for every subframe
 * 1-9 and slot, the pilot comb followed by the data symbols. Payload bits
 * fill data symbols in (subframe, slot, data symbol, subcarrier) order.
 */
#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "rapro/channel/channel_model.h"
#include "rapro/config/system_config.h"
#include "rapro/phy/pilots.h"
#include "rapro/phy/resource_grid.h"

namespace rapro::frontend {

using Bits = std::vector<std::uint8_t>;

/// Seeded PRBS payload of UserBitsPerFrame(user) bits.
Bits GeneratePayload(const FrameConfig& cfg, std::uint64_t payload_seed,
                     std::uint32_t frame_seq, std::size_t user);

/// The slice of a frame payload carried by subframe `subframe_idx` (1-based).
std::span<const std::uint8_t> SubframeBits(const FrameConfig& cfg,
                                           std::span<const std::uint8_t> frame_bits,
                                           std::size_t user,
                                           std::size_t subframe_idx);

/// Per-user 1 x SymbolsPerFrame x N_sc grids. Throws LengthError naming the
/// expected and actual bit counts when a payload does not fill its user's
/// data symbols exactly.
std::vector<ResourceGrid> BuildUplinkFrame(const FrameConfig& cfg,
                                           const std::vector<Bits>& payload,
                                           const PilotSet& pilots);

std::uint64_t FrameChannelSeed(std::uint64_t channel_seed, std::uint32_t frame_seq);
std::uint64_t SymbolNoiseSeed(std::uint64_t noise_seed, std::uint32_t frame_seq,
                              std::size_t subframe_idx, std::size_t symbol);

/// Everything needed to regenerate one frame exactly from a SystemConfig.
struct SynthesizedFrame {
  std::uint32_t frame_seq = 0;
  std::vector<Bits> payload;
  ChannelRealization channel;
  std::vector<ResourceGrid> user_grids;
};

class FrameSynthesizer {
 public:
  explicit FrameSynthesizer(SystemConfig config);

  const SystemConfig& config() const { return config_; }
  const PilotSet& pilots() const { return pilots_; }

  SynthesizedFrame Build(std::uint32_t frame_seq) const;

  /// Antenna-domain samples of one subframe after the channel, noise and
  /// front-end gain: M x SymbolsPerSubframe x N_sc.
  ResourceGrid ReceiveSubframe(const SynthesizedFrame& frame,
                               std::size_t subframe_idx) const;

  /// ReceiveSubframe followed by packetization.
  std::vector<std::vector<std::uint8_t>> SubframePackets(
      const SynthesizedFrame& frame, std::size_t subframe_idx) const;

 private:
  SystemConfig config_;
  PilotSet pilots_;
};

/// Regenerates transmitted payload bits on demand, keeping the most recent
/// frames. Single-threaded.
class PayloadCache {
 public:
  PayloadCache(FrameConfig cfg, std::uint64_t payload_seed, std::size_t capacity = 4);

  /// Bits user `user` sent in (frame_seq, subframe_idx).
  std::span<const std::uint8_t> Subframe(std::uint32_t frame_seq, std::size_t subframe_idx,
                                         std::size_t user);

 private:
  FrameConfig cfg_;
  std::uint64_t seed_;
  std::size_t capacity_;
  std::vector<std::pair<std::uint32_t, std::vector<Bits>>> frames_;  // most recent last
};

}  // namespace rapro::frontend
