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
 * @file wire_test.cc
 * @brief Q1.15 quantization, packet encode/decode and the golden subframe.
 */
#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <random>

#include "golden.h"
#include "rapro/wire/packet.h"
#include "rapro/wire/q15.h"
#include "test_util.h"

namespace rapro::wire {
namespace {

/// Reference quantizer written from the format definition: saturate, then
/// round half away from zero.
std::int16_t RefQ15(double x) {
  const double clipped = std::clamp(x, -1.0, 1.0 - 1.0 / 32768.0);
  const double scaled = clipped * 32768.0;
  const double r = scaled >= 0 ? std::floor(scaled + 0.5) : -std::floor(-scaled + 0.5);
  return static_cast<std::int16_t>(std::clamp(r, -32768.0, 32767.0));
}

std::uint16_t Le16(const std::vector<std::uint8_t>& b, std::size_t off) {
  return static_cast<std::uint16_t>(b[off] | (b[off + 1] << 8));
}

TEST(Q15, SpecExamples) {
  EXPECT_EQ(QuantizeQ15({0.0, 0.0}), (std::array<std::uint8_t, 4>{0, 0, 0, 0}));
  EXPECT_EQ(QuantizeQ15({1.0, 0.0}), (std::array<std::uint8_t, 4>{0xFF, 0x7F, 0, 0}));
  EXPECT_EQ(QuantizeQ15({-0.5, 0.25}), (std::array<std::uint8_t, 4>{0x00, 0xC0, 0x00, 0x20}));
  const auto a = QuantizeQ15({-0.5, 0.25});
  EXPECT_EQ(DequantizeQ15(a), cdouble(-0.5, 0.25));
  EXPECT_EQ(DequantizeQ15(QuantizeQ15({1.0, 0.0})), cdouble(32767.0 / 32768.0, 0.0));
  EXPECT_EQ(DequantizeQ15(QuantizeQ15({0.0, 0.0})), cdouble(0.0, 0.0));
}

TEST(Q15, SaturatesAndRoundsHalfAway) {
  EXPECT_EQ(ToQ15(5.0), 32767);
  EXPECT_EQ(ToQ15(-5.0), -32768);
  EXPECT_EQ(ToQ15(-1.0), -32768);
  EXPECT_EQ(ToQ15(0.5 / 32768.0), 1);
  EXPECT_EQ(ToQ15(-0.5 / 32768.0), -1);
  EXPECT_EQ(ToQ15(1.5 / 32768.0), 2);
  EXPECT_EQ(ToQ15(std::nan("")), 0);
}

TEST(Q15, MatchesReferenceQuantizer) {
  std::mt19937_64 gen(15);
  std::uniform_real_distribution<double> d(-1.2, 1.2);
  for (int i = 0; i < 200000; ++i) {
    const double x = d(gen);
    ASSERT_EQ(ToQ15(x), RefQ15(x)) << x;
  }
}

TEST(Q15, RoundTripErrorBoundedOverMillionSamples) {
  std::mt19937_64 gen(16);
  std::uniform_real_distribution<double> d(-1.0, 1.0 - 1.0 / 32768.0);
  const double bound = std::sqrt(2.0) / 32768.0;
  double worst = 0.0;
  for (int i = 0; i < 1'000'000; ++i) {
    const cdouble x{d(gen), d(gen)};
    worst = std::max(worst, std::abs(DequantizeQ15(QuantizeQ15(x)) - x));
  }
  EXPECT_LE(worst, bound);
}

TEST(Q15, ShortInputRejected) {
  const std::uint8_t three[3] = {};
  EXPECT_THROW(DequantizeQ15(three), LengthError);
}

TEST(Packet, HeaderByteLayout) {
  SampleHeader h;
  h.flags = 0;
  h.frame_seq = 0x01020304;
  h.subframe_idx = 9;
  h.slot_idx = 1;
  h.symbol_idx = 2;
  h.antenna_idx = 15;
  h.subcarrier_start = 0x0384;  // 900
  h.sample_count = 300;
  std::vector<std::uint8_t> b(kHeaderBytes, 0xAA);
  WriteHeader(h, b);
  const std::vector<std::uint8_t> expect = {0x50, 0x52, 0x01, 0x00, 0x04, 0x03, 0x02, 0x01,
                                            0x09, 0x01, 0x02, 0x0F, 0x84, 0x03, 0x2C, 0x01,
                                            0, 0, 0, 0, 0, 0, 0, 0};
  EXPECT_EQ(b, expect);
  EXPECT_EQ(ReadHeader(b), h);
}

TEST(Packet, MarkerLayout) {
  const auto m = EncodeMarker(0xAABBCCDD);
  ASSERT_EQ(m.size(), kHeaderBytes);
  EXPECT_EQ(m[3], kFlagFrameStart);
  EXPECT_EQ(m[4], 0xDD);
  EXPECT_EQ(m[7], 0xAA);
  EXPECT_EQ(m[8], 0);
  const auto d = DecodePacket(m);
  EXPECT_TRUE(d.header.IsMarker());
  EXPECT_TRUE(d.samples.empty());
}

TEST(Packet, DefaultSubframeCount) {
  const FrameConfig cfg;
  EXPECT_EQ(PacketsPerSubframe(cfg, 300), 384u);
  const ResourceGrid grid(16, 6, 1200);
  const auto packets = EncodePackets(grid, 0, 1, cfg, 300);
  ASSERT_EQ(packets.size(), 384u);
  for (const auto& p : packets) EXPECT_EQ(p.size(), 24u + 1200u);
}

TEST(Packet, SingleAntennaSingleFragment) {
  FrameConfig cfg;
  cfg.num_bs_antennas = 1;
  cfg.num_users = 1;
  cfg.data_symbols_per_slot = 0;  // pilot-only slots
  cfg.slots_per_subframe = 1;
  cfg.modulation = {Modulation::kQpsk};
  const ResourceGrid grid(1, 1, 1200);
  EXPECT_EQ(EncodePackets(grid, 0, 1, cfg, 1200).size(), 1u);
}

TEST(Packet, RejectsNonDividingFragment) {
  const FrameConfig cfg;
  const ResourceGrid grid(16, 6, 1200);
  EXPECT_THROW(EncodePackets(grid, 0, 1, cfg, 7), ConfigError);
  EXPECT_THROW(EncodePackets(grid, 0, 1, cfg, 0), ConfigError);
}

TEST(Packet, EmissionOrderAndRoundTrip) {
  auto sys = testing::SmallConfig();
  const FrameConfig& cfg = sys.frame;
  std::mt19937_64 gen(3);
  ResourceGrid grid(cfg.num_bs_antennas, cfg.SymbolsPerSubframe(), cfg.used_subcarriers);
  const auto v = testing::RandomComplex(gen, grid.size(), 0.2);
  std::copy(v.begin(), v.end(), grid.data().begin());
  const auto packets = EncodePackets(grid, 42, 5, cfg, 24);
  ASSERT_EQ(packets.size(), 4u * 6u * 2u);
  std::size_t i = 0;
  for (std::size_t m = 0; m < 4; ++m) {
    for (std::size_t s = 0; s < 6; ++s) {
      for (std::size_t f = 0; f < 2; ++f, ++i) {
        const auto d = DecodePacket(packets[i], WireLimits::From(cfg));
        EXPECT_EQ(d.header.frame_seq, 42u);
        EXPECT_EQ(d.header.subframe_idx, 5);
        EXPECT_EQ(d.header.antenna_idx, m);
        EXPECT_EQ(d.header.slot_idx, s / 3);
        EXPECT_EQ(d.header.symbol_idx, s % 3);
        EXPECT_EQ(d.header.subcarrier_start, f * 24);
        for (std::size_t k = 0; k < 24; ++k) {
          EXPECT_LE(std::abs(d.samples[k] - grid.at(m, s, f * 24 + k)), std::sqrt(2.0) / 32768.0);
        }
      }
    }
  }
}

TEST(Packet, DecodeErrors) {
  const FrameConfig cfg;
  const auto good = EncodePackets(ResourceGrid(16, 6, 1200), 1, 1, cfg, 300)[0];
  std::mt19937_64 gen(4);
  auto junk = testing::RandomBits(gen, 64);
  junk[0] = 0x00;
  junk[1] = 0x11;
  try {
    DecodePacket(junk);
    FAIL();
  } catch (const WireError& e) {
    EXPECT_EQ(e.wire_kind(), WireError::Kind::kMalformed);
    EXPECT_EQ(e.kind(), "malformed_packet");
  }
  auto short2 = good;
  short2.resize(short2.size() - 2);
  try {
    DecodePacket(short2);
    FAIL();
  } catch (const WireError& e) {
    EXPECT_EQ(e.wire_kind(), WireError::Kind::kTruncated);
  }
  auto bad_version = good;
  bad_version[2] = 2;
  EXPECT_THROW(DecodePacket(bad_version), WireError);
  auto reserved = good;
  reserved[20] = 1;
  EXPECT_THROW(DecodePacket(reserved), WireError);
  auto antenna = good;
  antenna[11] = 16;
  try {
    DecodePacket(antenna, WireLimits::From(cfg));
    FAIL();
  } catch (const WireError& e) {
    EXPECT_EQ(e.wire_kind(), WireError::Kind::kRange);
  }
  auto symbol = good;
  symbol[10] = 3;
  EXPECT_THROW(DecodePacket(symbol, WireLimits::From(cfg)), WireError);
  auto subframe = good;
  subframe[8] = 0;
  EXPECT_THROW(DecodePacket(subframe, WireLimits::From(cfg)), WireError);
  auto span = good;
  span[12] = 0x20;  // start 1056 + 300 > 1200
  span[13] = 0x04;
  EXPECT_THROW(DecodePacket(span, WireLimits::From(cfg)), WireError);
}

TEST(Packet, RateIdentityForAnyConfig) {
  std::mt19937_64 gen(5);
  for (int i = 0; i < 50; ++i) {
    FrameConfig cfg;
    cfg.num_users = 1 + gen() % 8;
    cfg.num_bs_antennas = cfg.num_users + gen() % 24;
    cfg.used_subcarriers = 60 * (1 + gen() % 20);
    const std::size_t spp = 60;
    const std::size_t packets = PacketsPerSubframe(cfg, spp) * cfg.DataSubframes();
    EXPECT_EQ(packets * spp * 4,
              cfg.used_subcarriers * cfg.SymbolsPerFrame() * cfg.num_bs_antennas * 4);
  }
}

TEST(Golden, HeaderFieldsOfGoldenPackets) {
  const auto packets = testing::GoldenPackets();
  ASSERT_EQ(packets.size(), 24u);
  for (std::size_t i = 0; i < packets.size(); ++i) {
    const auto& p = packets[i];
    ASSERT_EQ(p.size(), 24u + 24u * 4u);
    EXPECT_EQ(p[0], 0x50);
    EXPECT_EQ(p[1], 0x52);
    EXPECT_EQ(p[2], 1);
    EXPECT_EQ(p[3], 0);
    EXPECT_EQ(p[4], testing::kGoldenFrame);
    EXPECT_EQ(p[5] | p[6] | p[7], 0);
    EXPECT_EQ(p[8], testing::kGoldenSubframe);
    EXPECT_EQ(p[9], (i / 2) % 6 / 3);
    EXPECT_EQ(p[10], (i / 2) % 3);
    EXPECT_EQ(p[11], i / 12);
    EXPECT_EQ(Le16(p, 12), (i % 2) * 24);
    EXPECT_EQ(Le16(p, 14), 24);
    for (std::size_t b = 16; b < 24; ++b) EXPECT_EQ(p[b], 0);
  }
}

TEST(Golden, PayloadMatchesIndependentQuantization) {
  const auto cfg = testing::GoldenConfig();
  const frontend::FrameSynthesizer synth(cfg);
  const auto frame = synth.Build(testing::kGoldenFrame);
  const auto packets = testing::GoldenPackets();
  // Identity channel, no noise: antenna m carries user m scaled by the gain.
  const double gain = 0.25 / std::sqrt(2.0);
  for (std::size_t i = 0; i < packets.size(); ++i) {
    const std::size_t m = i / 12, s = (i / 2) % 6, start = (i % 2) * 24;
    const std::size_t frame_symbol = (testing::kGoldenSubframe - 1) * 6 + s;
    for (std::size_t k = 0; k < 24; ++k) {
      const cdouble x = gain * frame.user_grids[m].at(0, frame_symbol, start + k);
      const auto re = static_cast<std::int16_t>(Le16(packets[i], 24 + 4 * k));
      const auto im = static_cast<std::int16_t>(Le16(packets[i], 26 + 4 * k));
      EXPECT_EQ(re, RefQ15(x.real()));
      EXPECT_EQ(im, RefQ15(x.imag()));
    }
  }
}

TEST(Golden, MatchesCheckedInFile) {
  const auto bytes = testing::Frame(testing::GoldenPackets());
  if (std::getenv("RAPRO_UPDATE_GOLDEN") != nullptr) {
    std::ofstream out(testing::GoldenPath(), std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
  }
  const auto golden = testing::ReadFileBytes(testing::GoldenPath());
  ASSERT_EQ(golden.size(), 24u * (4u + 120u)) << testing::GoldenPath();
  EXPECT_EQ(bytes, golden);
}

}  // namespace
}  // namespace rapro::wire
