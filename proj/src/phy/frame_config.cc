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
#include "rapro/phy/frame_config.h"

#include <algorithm>
#include <cctype>

#include "rapro/common/error.h"

namespace rapro {

std::string_view ToString(Modulation m) {
  switch (m) {
    case Modulation::kQpsk:
      return "QPSK";
    case Modulation::kQam16:
      return "QAM16";
    case Modulation::kQam64:
      return "QAM64";
    case Modulation::kQam256:
      return "QAM256";
  }
  return "?";
}

Modulation ParseModulation(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::toupper(c); });
  s.erase(std::remove(s.begin(), s.end(), '-'), s.end());
  if (s == "QPSK" || s == "QAM4" || s == "4QAM") return Modulation::kQpsk;
  if (s == "QAM16" || s == "16QAM") return Modulation::kQam16;
  if (s == "QAM64" || s == "64QAM") return Modulation::kQam64;
  if (s == "QAM256" || s == "256QAM") return Modulation::kQam256;
  throw ConfigError("unknown modulation '" + std::string(name) + "'");
}

Modulation ModulationFromBits(std::size_t bits_per_symbol) {
  switch (bits_per_symbol) {
    case 2:
      return Modulation::kQpsk;
    case 4:
      return Modulation::kQam16;
    case 6:
      return Modulation::kQam64;
    case 8:
      return Modulation::kQam256;
    default:
      throw ConfigError("unsupported bits per symbol " +
                        std::to_string(bits_per_symbol));
  }
}

Modulation FrameConfig::UserModulation(std::size_t user) const {
  if (user >= modulation.size()) {
    throw ConfigError("no modulation configured for user " +
                      std::to_string(user));
  }
  return modulation[user];
}

std::size_t FrameConfig::UserBitsPerSubframe(std::size_t user) const {
  return DataSymbolsPerSubframe() * used_subcarriers *
         BitsPerSymbol(UserModulation(user));
}

std::size_t FrameConfig::UserBitsPerFrame(std::size_t user) const {
  return DataSubframes() * UserBitsPerSubframe(user);
}

void FrameConfig::Validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (num_users < 1) fail("num_users must be >= 1");
  if (num_bs_antennas < num_users) {
    fail("num_bs_antennas (" + std::to_string(num_bs_antennas) +
         ") must be >= num_users (" + std::to_string(num_users) + ")");
  }
  if (num_bs_antennas > 256) fail("num_bs_antennas must fit the 1-byte label");
  if (used_subcarriers < 1 || used_subcarriers > fft_size) {
    fail("used_subcarriers must be in [1, fft_size]");
  }
  if (used_subcarriers > 65535) fail("used_subcarriers must fit 16 bits");
  if (used_subcarriers % num_users != 0) {
    fail("used_subcarriers (" + std::to_string(used_subcarriers) +
         ") must be divisible by num_users (" + std::to_string(num_users) +
         ") for the pilot comb");
  }
  if (num_subframes < 2) fail("num_subframes must be >= 2");
  if (slots_per_subframe < 1) fail("slots_per_subframe must be >= 1");
  if (SymbolsPerSlot() > 255) fail("too many symbols per slot");
  if (!(sample_rate > 0.0) || !(frame_duration > 0.0)) {
    fail("sample_rate and frame_duration must be positive");
  }
  if (!(cpu_clock_hz > 0.0)) fail("cpu_clock_hz must be positive");
  if (modulation.size() != num_users) {
    fail("modulation list has " + std::to_string(modulation.size()) +
         " entries, expected num_users = " + std::to_string(num_users));
  }
}

std::vector<Modulation> FrameConfig::MixedModulation(std::size_t num_users) {
  std::vector<Modulation> m(num_users, Modulation::kQam16);
  if (!m.empty()) m[0] = Modulation::kQpsk;
  return m;
}

}  // namespace rapro
