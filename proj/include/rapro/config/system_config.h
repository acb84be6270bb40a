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
 * @file system_config.h
 * @brief The shared configuration document read by every CLI subcommand.
 *
 * Schema (all keys optional except config_version; see docs/config.md):
 *
 *   config_version: 1
 *   frame:    num_bs_antennas, num_users, fft_size, used_subcarriers,
 *             sample_rate, data_symbols_per_slot, modulation (list or one
 *             name), cpu_clock_hz
 *   channel:  model (identity | flat_rayleigh | tdl), tap_powers, num_taps,
 *             noise_var, pilot_noise
 *   wire:     samples_per_packet, frontend_gain (0 = automatic)
 *   seeds:    pilot, payload, channel, noise
 *   receiver: noise_var_min, noise_var_override (null = estimate)
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"
#include "rapro/channel/channel_model.h"
#include "rapro/phy/frame_config.h"

namespace rapro {

constexpr int kConfigVersion = 1;

struct WireConfig {
  std::size_t samples_per_packet = 300;
  /// Digital gain applied before Q1.15 quantization; 0 selects 0.25/sqrt(K).
  double frontend_gain = 0.0;
};

struct Seeds {
  std::uint64_t pilot = 0x5241;
  std::uint64_t payload = 1;
  std::uint64_t channel = 2;
  std::uint64_t noise = 3;
};

struct ReceiverConfig {
  double noise_var_min = 1e-6;
  std::optional<double> noise_var_override;
};

struct SystemConfig {
  FrameConfig frame;
  ChannelModel channel;
  /// When false the emulator leaves pilot symbols noise-free (ideal
  /// training), so detection sees the analytic perfect-CSI AWGN link.
  bool pilot_noise = true;
  WireConfig wire;
  Seeds seeds;
  ReceiverConfig receiver;

  void Validate() const;
  double EffectiveGain() const;
  /// Replaces the payload, channel and noise seeds with ones derived from a
  /// single run seed. The pilot seed is part of the link and stays.
  void ReseedRun(std::uint64_t run_seed);
  /// Hash of everything both ends of the link must agree on (frame layout,
  /// wire geometry, gain and pilot seed), as 16 hex digits.
  std::string LinkFingerprint() const;
};

nlohmann::json ToJson(const SystemConfig& cfg);
SystemConfig SystemConfigFromJson(const nlohmann::json& j);
SystemConfig LoadSystemConfig(const std::filesystem::path& path);

nlohmann::json ToJson(const FrameConfig& cfg);
FrameConfig FrameConfigFromJson(const nlohmann::json& j);

}  // namespace rapro
