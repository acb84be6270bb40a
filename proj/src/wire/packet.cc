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
#include "rapro/wire/packet.h"

#include "rapro/wire/q15.h"

namespace rapro::wire {

namespace {

void Put16(std::uint8_t* p, std::uint16_t v) {
  p[0] = static_cast<std::uint8_t>(v & 0xFF);
  p[1] = static_cast<std::uint8_t>(v >> 8);
}

void Put32(std::uint8_t* p, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) p[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

std::uint16_t Get16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t Get32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

[[noreturn]] void Fail(WireError::Kind kind, const std::string& what) {
  throw WireError(kind, what);
}

}  // namespace

std::string WireError::KindName(Kind kind) {
  switch (kind) {
    case Kind::kMalformed:
      return "malformed_packet";
    case Kind::kTruncated:
      return "truncated_packet";
    case Kind::kRange:
      return "range";
  }
  return "wire";
}

WireLimits WireLimits::From(const FrameConfig& cfg) {
  WireLimits l;
  l.num_antennas = cfg.num_bs_antennas;
  l.used_subcarriers = cfg.used_subcarriers;
  l.num_subframes = cfg.num_subframes;
  l.slots_per_subframe = cfg.slots_per_subframe;
  l.symbols_per_slot = cfg.SymbolsPerSlot();
  return l;
}

void WriteHeader(const SampleHeader& h, std::span<std::uint8_t> out) {
  if (out.size() < kHeaderBytes) throw LengthError("header buffer too small");
  std::uint8_t* p = out.data();
  Put16(p + 0, h.magic);
  p[2] = h.version;
  p[3] = h.flags;
  Put32(p + 4, h.frame_seq);
  p[8] = h.subframe_idx;
  p[9] = h.slot_idx;
  p[10] = h.symbol_idx;
  p[11] = h.antenna_idx;
  Put16(p + 12, h.subcarrier_start);
  Put16(p + 14, h.sample_count);
  std::fill(p + 16, p + 24, std::uint8_t{0});
}

SampleHeader ReadHeader(std::span<const std::uint8_t> bytes) {
  const std::uint8_t* p = bytes.data();
  if (bytes.size() >= 2 && Get16(p) != kMagic) {
    Fail(WireError::Kind::kMalformed, "bad magic");
  }
  if (bytes.size() < kHeaderBytes) {
    Fail(WireError::Kind::kTruncated,
         "packet of " + std::to_string(bytes.size()) +
             " bytes is shorter than the header");
  }
  SampleHeader h;
  h.magic = Get16(p);
  h.version = p[2];
  h.flags = p[3];
  h.frame_seq = Get32(p + 4);
  h.subframe_idx = p[8];
  h.slot_idx = p[9];
  h.symbol_idx = p[10];
  h.antenna_idx = p[11];
  h.subcarrier_start = Get16(p + 12);
  h.sample_count = Get16(p + 14);
  if (h.version != kVersion) {
    Fail(WireError::Kind::kMalformed,
         "unsupported version " + std::to_string(h.version));
  }
  for (std::size_t i = 16; i < kHeaderBytes; ++i) {
    if (p[i] != 0) Fail(WireError::Kind::kMalformed, "reserved bytes not zero");
  }
  return h;
}

void CheckRange(const SampleHeader& h, const WireLimits& limits) {
  auto range = [](const std::string& what) {
    Fail(WireError::Kind::kRange, what);
  };
  if (h.IsMarker()) {
    if (h.subframe_idx != 0 || h.sample_count != 0) {
      range("marker packet must have subframe_idx 0 and no samples");
    }
    return;
  }
  if (h.subframe_idx < 1 || h.subframe_idx >= limits.num_subframes) {
    range("subframe_idx " + std::to_string(h.subframe_idx) + " out of range");
  }
  if (h.slot_idx >= limits.slots_per_subframe) {
    range("slot_idx " + std::to_string(h.slot_idx) + " out of range");
  }
  if (h.symbol_idx >= limits.symbols_per_slot) {
    range("symbol_idx " + std::to_string(h.symbol_idx) + " out of range");
  }
  if (h.antenna_idx >= limits.num_antennas) {
    range("antenna_idx " + std::to_string(h.antenna_idx) + " out of range");
  }
  if (h.sample_count == 0 ||
      static_cast<std::size_t>(h.subcarrier_start) + h.sample_count >
          limits.used_subcarriers) {
    range("subcarriers [" + std::to_string(h.subcarrier_start) + ", +" +
          std::to_string(h.sample_count) + ") exceed " +
          std::to_string(limits.used_subcarriers));
  }
}

std::vector<std::uint8_t> EncodeMarker(std::uint32_t frame_seq) {
  SampleHeader h;
  h.flags = kFlagFrameStart;
  h.frame_seq = frame_seq;
  std::vector<std::uint8_t> out(kHeaderBytes);
  WriteHeader(h, out);
  return out;
}

std::size_t PacketsPerSubframe(const FrameConfig& cfg,
                               std::size_t samples_per_packet) {
  return cfg.num_bs_antennas * cfg.SymbolsPerSubframe() *
         (cfg.used_subcarriers / samples_per_packet);
}

std::vector<std::vector<std::uint8_t>> EncodePackets(
    const ResourceGrid& subframe_grid, std::uint32_t frame_seq,
    std::uint8_t subframe_idx, const FrameConfig& cfg,
    std::size_t samples_per_packet) {
  const std::size_t N = cfg.used_subcarriers;
  if (samples_per_packet == 0 || N % samples_per_packet != 0 ||
      samples_per_packet > 65535) {
    throw ConfigError("samples_per_packet (" +
                      std::to_string(samples_per_packet) +
                      ") must divide used_subcarriers (" + std::to_string(N) +
                      ")");
  }
  if (subframe_grid.num_streams() != cfg.num_bs_antennas ||
      subframe_grid.num_symbols() != cfg.SymbolsPerSubframe() ||
      subframe_grid.num_subcarriers() != N) {
    throw LengthError("subframe grid dimensions do not match the config");
  }
  if (subframe_idx < 1 || subframe_idx >= cfg.num_subframes) {
    throw WireError(WireError::Kind::kRange, "subframe_idx out of range");
  }
  const std::size_t fragments = N / samples_per_packet;
  const std::size_t per_slot = cfg.SymbolsPerSlot();
  std::vector<std::vector<std::uint8_t>> packets;
  packets.reserve(PacketsPerSubframe(cfg, samples_per_packet));

  SampleHeader h;
  h.frame_seq = frame_seq;
  h.subframe_idx = subframe_idx;
  h.sample_count = static_cast<std::uint16_t>(samples_per_packet);
  for (std::size_t m = 0; m < cfg.num_bs_antennas; ++m) {
    h.antenna_idx = static_cast<std::uint8_t>(m);
    for (std::size_t s = 0; s < cfg.SymbolsPerSubframe(); ++s) {
      h.slot_idx = static_cast<std::uint8_t>(s / per_slot);
      h.symbol_idx = static_cast<std::uint8_t>(s % per_slot);
      const auto row = subframe_grid.row(m, s);
      for (std::size_t f = 0; f < fragments; ++f) {
        h.subcarrier_start = static_cast<std::uint16_t>(f * samples_per_packet);
        std::vector<std::uint8_t> pkt(kHeaderBytes +
                                      kBytesPerSample * samples_per_packet);
        WriteHeader(h, pkt);
        std::uint8_t* dst = pkt.data() + kHeaderBytes;
        for (std::size_t i = 0; i < samples_per_packet; ++i) {
          QuantizeQ15(row[h.subcarrier_start + i],
                      std::span<std::uint8_t, 4>(dst + kBytesPerSample * i, 4));
        }
        packets.push_back(std::move(pkt));
      }
    }
  }
  return packets;
}

DecodedPacket DecodePacket(std::span<const std::uint8_t> bytes,
                           const WireLimits& limits) {
  DecodedPacket out;
  out.header = ReadHeader(bytes);
  const std::size_t payload = bytes.size() - kHeaderBytes;
  const std::size_t expected = kBytesPerSample * out.header.sample_count;
  if (payload != expected) {
    Fail(WireError::Kind::kTruncated,
         "payload is " + std::to_string(payload) + " bytes, header announces " +
             std::to_string(expected));
  }
  CheckRange(out.header, limits);
  out.samples.resize(out.header.sample_count);
  const std::uint8_t* src = bytes.data() + kHeaderBytes;
  for (std::size_t i = 0; i < out.samples.size(); ++i) {
    out.samples[i] = DequantizeQ15({src + kBytesPerSample * i, kBytesPerSample});
  }
  return out;
}

}  // namespace rapro::wire
