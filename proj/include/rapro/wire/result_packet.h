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
 * @file result_packet.h
 * @brief Demodulated-output datagrams sent by the server's transmit worker,
 * and the capture file that records them.
 *
 * One datagram per (frame, subframe, slot, data symbol, user):
 *
 *   off size field
 *     0    2 magic            u16 0x5352 (bytes "RS")
 *     2    1 version          1
 *     3    1 flags            bit0 = equalized symbols appended
 *     4    4 frame_seq
 *     8    1 subframe_idx
 *     9    1 slot_idx
 *    10    1 symbol_idx       data symbol position in the slot (1..)
 *    11    1 user
 *    12    1 bits_per_symbol
 *    13    1 reserved         0
 *    14    2 sample_count     subcarriers in this record
 *    16    2 erased_count     subcarriers whose detection failed
 *    18    2 reserved         0
 *    20    4 noise_var        float32, per-slot estimate
 *    24    . bits             ceil(sample_count * bps / 8) bytes, MSB first
 *     .    . symbols          sample_count x (float32 I, float32 Q), if flagged
 *
 * Capture file: sequence of [u32 LE length][datagram].
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <vector>

#include "rapro/phy/resource_grid.h"

namespace rapro::wire {

constexpr std::uint16_t kResultMagic = 0x5352;
constexpr std::uint8_t kResultVersion = 1;
constexpr std::size_t kResultHeaderBytes = 24;
constexpr std::uint8_t kResultFlagSymbols = 0x01;

struct ResultRecord {
  std::uint32_t frame_seq = 0;
  std::uint8_t subframe_idx = 0;
  std::uint8_t slot_idx = 0;
  std::uint8_t symbol_idx = 0;
  std::uint8_t user = 0;
  std::uint8_t bits_per_symbol = 0;
  std::uint16_t erased_count = 0;
  float noise_var = 0.0f;
  std::vector<std::uint8_t> bits;  // one bit per byte
  std::vector<cdouble> symbols;    // empty when not dumped

  std::size_t sample_count() const {
    return bits_per_symbol ? bits.size() / bits_per_symbol : 0;
  }
};

std::vector<std::uint8_t> EncodeResult(const ResultRecord& record);
/// Throws WireError on malformed or truncated input.
ResultRecord DecodeResult(std::span<const std::uint8_t> bytes);

class CaptureWriter {
 public:
  explicit CaptureWriter(const std::filesystem::path& path);
  void Append(std::span<const std::uint8_t> datagram);
  void Flush() { out_.flush(); }

 private:
  std::ofstream out_;
};

/// Reads every datagram of a capture file. Throws WireError if the file
/// ends inside a record.
std::vector<std::vector<std::uint8_t>> ReadCapture(
    const std::filesystem::path& path);

}  // namespace rapro::wire
