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
 * @file process_subframe.h
 * @brief Per-subframe receive chain: LS estimation, interpolation, noise
 * estimation, LMMSE detection and hard demapping.
 */
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rapro/config/system_config.h"
#include "rapro/phy/pilots.h"
#include "rapro/server/subframe_bundle.h"
#include "rapro/wire/result_packet.h"

namespace rapro::server {

struct UserDetection {
  Modulation modulation = Modulation::kQpsk;
  /// Equalized symbols in (slot, data symbol, subcarrier) order.
  std::vector<cdouble> symbols;
  /// Hard decisions, one bit per byte, same order as the payload bits.
  std::vector<std::uint8_t> bits;
};

struct DetectionResult {
  SubframeKey key;
  std::vector<UserDetection> users;
  std::vector<double> slot_noise_var;
  /// Subcarriers whose Gram matrix could not be factored, per slot. Their
  /// symbols are zero and their bits are not meaningful.
  std::vector<std::size_t> slot_erased;
  std::size_t erased_subcarriers = 0;
  double processing_time_s = 0.0;
  /// Time-stamp counter delta, when the platform has one.
  std::optional<std::uint64_t> tsc_cycles;
  /// processing_time_s * cpu_clock_hz.
  double derived_cycles = 0.0;
};

/// Runs the receive chain on a complete subframe.
DetectionResult ProcessSubframe(const SubframeBundle& bundle, const FrameConfig& cfg,
                                const PilotSet& pilots,
                                const ReceiverConfig& receiver = {});

/// One result record per (slot, data symbol, user).
std::vector<wire::ResultRecord> ToResultRecords(const DetectionResult& result,
                                                const FrameConfig& cfg,
                                                bool include_symbols);

/// Reads the time-stamp counter, or nullopt where unavailable.
std::optional<std::uint64_t> ReadCycleCounter();

}  // namespace rapro::server
