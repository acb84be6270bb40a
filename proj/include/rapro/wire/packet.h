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
 * @file packet.h
 * @brief Sample packet layout between the front end and the baseband server.
 *
 * One UDP datagram = 24-byte little-endian header + sample_count Q1.15
 * complex samples. Byte layout (see docs/wire.md):
 *
 *   off size field
 *     0    2 magic            u16 0x5250, i.e. bytes 0x50 0x52
 *     2    1 version          1
 *     3    1 flags            bit0 = frame-start marker
 *     4    4 frame_seq
 *     8    1 subframe_idx     1..9 (0 in marker packets)
 *     9    1 slot_idx
 *    10    1 symbol_idx       0 = pilot
 *    11    1 antenna_idx
 *    12    2 subcarrier_start
 *    14    2 sample_count
 *    16    8 reserved         0
 */
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rapro/common/error.h"
#include "rapro/phy/frame_config.h"
#include "rapro/phy/resource_grid.h"

namespace rapro::wire {

constexpr std::uint16_t kMagic = 0x5250;
constexpr std::uint8_t kVersion = 1;
constexpr std::size_t kHeaderBytes = 24;
constexpr std::uint8_t kFlagFrameStart = 0x01;
constexpr std::size_t kDefaultSamplesPerPacket = 300;

struct SampleHeader {
  std::uint16_t magic = kMagic;
  std::uint8_t version = kVersion;
  std::uint8_t flags = 0;
  std::uint32_t frame_seq = 0;
  std::uint8_t subframe_idx = 0;
  std::uint8_t slot_idx = 0;
  std::uint8_t symbol_idx = 0;
  std::uint8_t antenna_idx = 0;
  std::uint16_t subcarrier_start = 0;
  std::uint16_t sample_count = 0;

  bool IsMarker() const { return (flags & kFlagFrameStart) != 0; }
  bool operator==(const SampleHeader&) const = default;
};

class WireError : public Error {
 public:
  enum class Kind { kMalformed, kTruncated, kRange };
  WireError(Kind kind, const std::string& what)
      : Error(KindName(kind), what), wire_kind_(kind) {}
  Kind wire_kind() const { return wire_kind_; }
  static std::string KindName(Kind kind);

 private:
  Kind wire_kind_;
};

/// Bounds a decoded header is checked against.
struct WireLimits {
  std::size_t num_antennas = 256;
  std::size_t used_subcarriers = 65535;
  std::size_t num_subframes = 10;
  std::size_t slots_per_subframe = 2;
  std::size_t symbols_per_slot = 3;

  static WireLimits From(const FrameConfig& cfg);
};

struct DecodedPacket {
  SampleHeader header;
  std::vector<cdouble> samples;
};

void WriteHeader(const SampleHeader& h, std::span<std::uint8_t> out);
/// Parses and checks magic/version/reserved. Throws WireError.
SampleHeader ReadHeader(std::span<const std::uint8_t> bytes);

/// Marker packet announcing the start of `frame_seq` (header only).
std::vector<std::uint8_t> EncodeMarker(std::uint32_t frame_seq);

/// Packs one subframe grid (M x SymbolsPerSubframe x N_sc) into one packet
/// per (antenna, symbol, fragment), emitted antenna-major, then symbol, then
/// fragment. Throws ConfigError unless samples_per_packet divides N_sc.
std::vector<std::vector<std::uint8_t>> EncodePackets(
    const ResourceGrid& subframe_grid, std::uint32_t frame_seq,
    std::uint8_t subframe_idx, const FrameConfig& cfg,
    std::size_t samples_per_packet = kDefaultSamplesPerPacket);

/// Packets per subframe for a configuration.
std::size_t PacketsPerSubframe(const FrameConfig& cfg,
                               std::size_t samples_per_packet);

/// Validates and dequantizes. Index checks use `limits`.
DecodedPacket DecodePacket(std::span<const std::uint8_t> bytes,
                           const WireLimits& limits = {});

/// Validates header fields against `limits` (range errors only).
void CheckRange(const SampleHeader& h, const WireLimits& limits);

}  // namespace rapro::wire
