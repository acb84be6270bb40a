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
 * @file frame_config.h
 * @brief Static dimensioning of the uplink air interface.
 *
 * A 10 ms frame holds 10 subframes. Subframe 0 is reserved for the
 * frame-start marker; subframes 1-9 each carry 2 slots of
 * (1 pilot + data_symbols_per_slot) OFDM symbols.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace rapro {

enum class Modulation : std::uint8_t {
  kQpsk = 2,
  kQam16 = 4,
  kQam64 = 6,
  kQam256 = 8,
};

constexpr std::size_t BitsPerSymbol(Modulation m) {
  return static_cast<std::size_t>(m);
}
std::string_view ToString(Modulation m);
/// Accepts "QPSK", "QAM16", "16QAM", ... (case-insensitive).
Modulation ParseModulation(std::string_view name);
/// Inverse of BitsPerSymbol; throws ConfigError for unsupported orders.
Modulation ModulationFromBits(std::size_t bits_per_symbol);

struct FrameConfig {
  std::size_t num_bs_antennas = 16;
  std::size_t num_users = 4;
  std::size_t fft_size = 2048;
  std::size_t used_subcarriers = 1200;
  double sample_rate = 30.72e6;
  double frame_duration = 10e-3;
  std::size_t num_subframes = 10;
  std::size_t slots_per_subframe = 2;
  std::size_t data_symbols_per_slot = 2;
  std::vector<Modulation> modulation = {Modulation::kQpsk, Modulation::kQam16,
                                        Modulation::kQam16,
                                        Modulation::kQam16};
  double cpu_clock_hz = 2.8e9;

  std::size_t SymbolsPerSlot() const { return 1 + data_symbols_per_slot; }
  std::size_t SymbolsPerSubframe() const {
    return slots_per_subframe * SymbolsPerSlot();
  }
  /// Subframes carrying samples (all but the marker subframe 0).
  std::size_t DataSubframes() const { return num_subframes - 1; }
  /// All transmitted symbols per frame, pilots included (54 at defaults).
  std::size_t SymbolsPerFrame() const {
    return DataSubframes() * SymbolsPerSubframe();
  }
  std::size_t DataSymbolsPerSubframe() const {
    return slots_per_subframe * data_symbols_per_slot;
  }
  std::size_t DataSymbolsPerFrame() const {
    return DataSubframes() * DataSymbolsPerSubframe();
  }
  std::size_t SlotsPerFrame() const {
    return DataSubframes() * slots_per_subframe;
  }
  double SamplesPerFrame() const { return sample_rate * frame_duration; }

  /// Symbol index inside a subframe grid.
  std::size_t SubframeSymbol(std::size_t slot, std::size_t symbol_in_slot) const {
    return slot * SymbolsPerSlot() + symbol_in_slot;
  }
  /// Symbol index inside a per-user frame grid (subframe_idx in 1..9).
  std::size_t FrameSymbol(std::size_t subframe_idx, std::size_t slot,
                          std::size_t symbol_in_slot) const {
    return (subframe_idx - 1) * SymbolsPerSubframe() +
           SubframeSymbol(slot, symbol_in_slot);
  }

  Modulation UserModulation(std::size_t user) const;
  std::size_t UserBitsPerSubframe(std::size_t user) const;
  std::size_t UserBitsPerFrame(std::size_t user) const;

  /// Throws ConfigError unless M >= K >= 1, N_sc <= fft_size, N_sc % K == 0
  /// and the modulation list has exactly one entry per user.
  void Validate() const;

  /// User 0 on QPSK and the remaining users on 16-QAM.
  static std::vector<Modulation> MixedModulation(std::size_t num_users);
};

}  // namespace rapro
