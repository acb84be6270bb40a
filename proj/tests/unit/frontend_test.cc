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
 * @file frontend_test.cc
 * @brief Uplink frame construction, synthesis determinism and streaming.
 */
#include <gtest/gtest.h>

#include <map>
#include <mutex>

#include "rapro/common/error.h"
#include "rapro/frontend/streamer.h"
#include "rapro/frontend/uplink.h"
#include "rapro/phy/modulation.h"
#include "rapro/wire/packet.h"
#include "test_util.h"

namespace rapro::frontend {
namespace {

/// Records what the streamer hands to the transport without keeping it.
class CountingSink : public DatagramSink {
 public:
  explicit CountingSink(std::size_t routes) : per_route_(routes) {}
  std::size_t num_routes() const override { return per_route_.size(); }
  bool Send(std::size_t route, std::span<const std::uint8_t> d) override {
    std::lock_guard lock(mu_);
    ++datagrams_;
    bytes_ += d.size();
    const auto h = wire::ReadHeader(d);
    if (h.IsMarker()) {
      ++per_route_[route].markers;
    } else {
      ++per_route_[route].data;
      if (h.antenna_idx % per_route_.size() != route) ++misrouted_;
      ++per_subframe_[{h.frame_seq, h.subframe_idx}];
    }
    return true;
  }
  struct Route {
    std::size_t markers = 0;
    std::size_t data = 0;
  };
  std::size_t datagrams_ = 0;
  std::size_t bytes_ = 0;
  std::size_t misrouted_ = 0;
  std::vector<Route> per_route_;
  std::map<std::pair<std::uint32_t, std::uint8_t>, std::size_t> per_subframe_;

 private:
  std::mutex mu_;
};

/// Keeps every datagram, for content comparisons.
class RecordingSink : public DatagramSink {
 public:
  std::size_t num_routes() const override { return 1; }
  bool Send(std::size_t, std::span<const std::uint8_t> d) override {
    datagrams.emplace_back(d.begin(), d.end());
    return true;
  }
  std::vector<std::vector<std::uint8_t>> datagrams;
};

SystemConfig NoiselessDefaults() {
  SystemConfig c;
  c.channel = ChannelModel::FlatRayleigh(0.0);
  return c;
}

StreamOptions Fast(std::size_t frames) {
  StreamOptions o;
  o.realtime_factor = 1000.0;  // 10 us frames: pacing never waits
  o.num_frames = frames;
  return o;
}

TEST(BuildUplinkFrame, DefaultCapacities) {
  const FrameConfig cfg;
  const PilotSet pilots(cfg, 1);
  std::vector<Bits> payload;
  for (std::size_t k = 0; k < 4; ++k) payload.push_back(GeneratePayload(cfg, 5, 0, k));
  EXPECT_EQ(payload[0].size(), 86'400u);
  EXPECT_EQ(payload[1].size(), 172'800u);
  EXPECT_EQ(payload[1].size(), 1200u * 36u * 4u);
  const auto grids = BuildUplinkFrame(cfg, payload, pilots);
  ASSERT_EQ(grids.size(), 4u);
  EXPECT_EQ(grids[0].num_symbols(), 54u);
}

TEST(BuildUplinkFrame, MismatchNamesCounts) {
  const FrameConfig cfg;
  const PilotSet pilots(cfg, 1);
  std::vector<Bits> payload;
  for (std::size_t k = 0; k < 4; ++k) payload.push_back(GeneratePayload(cfg, 5, 0, k));
  payload[2].pop_back();
  try {
    BuildUplinkFrame(cfg, payload, pilots);
    FAIL();
  } catch (const LengthError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("172799"), std::string::npos) << what;
    EXPECT_NE(what.find("172800"), std::string::npos) << what;
  }
  payload.pop_back();
  EXPECT_THROW(BuildUplinkFrame(cfg, payload, pilots), LengthError);
}

TEST(BuildUplinkFrame, PilotOnlyFrame) {
  FrameConfig cfg;
  cfg.data_symbols_per_slot = 0;
  const PilotSet pilots(cfg, 1);
  const std::vector<Bits> payload(4);
  EXPECT_EQ(cfg.UserBitsPerFrame(1), 0u);
  const auto grids = BuildUplinkFrame(cfg, payload, pilots);
  ASSERT_EQ(grids[3].num_symbols(), 18u);
  for (std::size_t s = 0; s < 18; ++s) {
    for (std::size_t n = 0; n < 1200; ++n) {
      EXPECT_EQ(grids[3].at(0, s, n), pilots.grid(3).at(0, 0, n));
    }
  }
}

TEST(BuildUplinkFrame, SlotLayout) {
  const auto cfg = testing::SmallConfig().frame;
  const PilotSet pilots(cfg, 2);
  std::vector<Bits> payload;
  for (std::size_t k = 0; k < 2; ++k) payload.push_back(GeneratePayload(cfg, 3, 1, k));
  const auto grids = BuildUplinkFrame(cfg, payload, pilots);
  for (std::size_t k = 0; k < 2; ++k) {
    const auto symbols = QamModulate(payload[k], cfg.modulation[k]);
    std::size_t next = 0;
    for (std::size_t sf = 1; sf <= 9; ++sf) {
      for (std::size_t slot = 0; slot < 2; ++slot) {
        for (std::size_t n = 0; n < 48; ++n) {
          EXPECT_EQ(grids[k].at(0, cfg.FrameSymbol(sf, slot, 0), n), pilots.grid(k).at(0, 0, n));
        }
        for (std::size_t d = 1; d <= 2; ++d) {
          for (std::size_t n = 0; n < 48; ++n) {
            EXPECT_EQ(grids[k].at(0, cfg.FrameSymbol(sf, slot, d), n), symbols[next++]);
          }
        }
      }
    }
    EXPECT_EQ(next, symbols.size());
  }
}

TEST(FrameSynthesizer, PacketsAreDeterministic) {
  SystemConfig c = testing::SmallConfig();
  c.channel = ChannelModel::TappedDelayLine(4, 0.05);
  const FrameSynthesizer a(c), b(c);
  EXPECT_EQ(a.SubframePackets(a.Build(4), 2), b.SubframePackets(b.Build(4), 2));
  SystemConfig d = c;
  d.seeds.noise += 1;
  const FrameSynthesizer e(d);
  EXPECT_NE(a.SubframePackets(a.Build(4), 2), e.SubframePackets(e.Build(4), 2));
}

TEST(FrameSynthesizer, IdentityReceiveIsScaledTransmit) {
  SystemConfig c = testing::SmallConfig();
  c.frame.num_bs_antennas = 2;
  c.channel = ChannelModel::Identity(0.0);
  const FrameSynthesizer synth(c);
  const auto frame = synth.Build(0);
  const auto rx = synth.ReceiveSubframe(frame, 5);
  for (std::size_t m = 0; m < 2; ++m) {
    for (std::size_t s = 0; s < 6; ++s) {
      for (std::size_t n = 0; n < 48; ++n) {
        EXPECT_EQ(rx.at(m, s, n), c.EffectiveGain() * frame.user_grids[m].at(0, 24 + s, n));
      }
    }
  }
}

TEST(FrameSynthesizer, NoiseFreePilotsWhenConfigured) {
  SystemConfig c = testing::SmallConfig();
  c.frame.num_bs_antennas = 2;
  c.channel = ChannelModel::Identity(0.1);
  c.pilot_noise = false;
  const FrameSynthesizer synth(c);
  const auto frame = synth.Build(0);
  const auto rx = synth.ReceiveSubframe(frame, 1);
  const double g = c.EffectiveGain();
  EXPECT_EQ(rx.at(1, 3, 5), g * frame.user_grids[1].at(0, 3, 5));   // pilot of slot 1
  EXPECT_NE(rx.at(1, 4, 5), g * frame.user_grids[1].at(0, 4, 5));   // data
}

TEST(PayloadCache, MatchesRegeneratedSlices) {
  const auto cfg = testing::SmallConfig().frame;
  PayloadCache cache(cfg, 9, 2);
  for (std::uint32_t f : {0u, 1u, 2u, 0u}) {
    const auto full = GeneratePayload(cfg, 9, f, 1);
    const auto slice = cache.Subframe(f, 4, 1);
    const auto expect = SubframeBits(cfg, full, 1, 4);
    EXPECT_TRUE(std::equal(slice.begin(), slice.end(), expect.begin(), expect.end()));
  }
  EXPECT_THROW(cache.Subframe(0, 1, 2), LengthError);
  EXPECT_THROW(cache.Subframe(0, 10, 0), LengthError);
}

TEST(StreamFrames, HundredDefaultFramesByteCount) {
  CountingSink sink(1);
  const auto report = StreamFrames(NoiselessDefaults(), Fast(100), sink);
  const std::size_t data_packets = 100u * 9u * 384u;
  EXPECT_EQ(report.frames_sent, 100u);
  EXPECT_EQ(report.payload_bytes, 100u * 4'147'200u);
  EXPECT_EQ(report.header_bytes, data_packets * 24u);
  EXPECT_EQ(report.marker_packets, 100u);
  EXPECT_EQ(report.marker_bytes, 100u * 24u);
  EXPECT_EQ(report.packets_sent, data_packets + 100u);
  EXPECT_EQ(report.bytes_sent, report.payload_bytes + report.header_bytes + report.marker_bytes);
  // Conservation against what the transport actually received.
  EXPECT_EQ(report.bytes_sent, sink.bytes_);
  EXPECT_EQ(report.packets_sent, sink.datagrams_);
}

TEST(StreamFrames, ZeroFramesSendsNothing) {
  CountingSink sink(2);
  const auto report = StreamFrames(testing::SmallConfig(), Fast(0), sink);
  EXPECT_EQ(report.packets_sent, 0u);
  EXPECT_EQ(report.bytes_sent, 0u);
  EXPECT_EQ(sink.datagrams_, 0u);
  EXPECT_EQ(report.pacing.samples, 0u);
}

TEST(StreamFrames, TwoRoutesSplitByAntennaParity) {
  CountingSink sink(2);
  const auto report = StreamFrames(testing::SmallConfig(), Fast(3), sink);
  EXPECT_EQ(sink.misrouted_, 0u);
  EXPECT_EQ(sink.per_route_[0].markers, 3u);
  EXPECT_EQ(sink.per_route_[1].markers, 3u);
  EXPECT_EQ(sink.per_route_[0].data, sink.per_route_[1].data);
  EXPECT_EQ(report.marker_packets, 6u);
}

TEST(StreamFrames, ContentIdenticalAcrossRuns) {
  RecordingSink a, b;
  auto c = testing::SmallConfig();
  c.channel.noise_var = 0.02;
  StreamFrames(c, Fast(2), a);
  StreamFrames(c, Fast(2), b);
  EXPECT_EQ(a.datagrams, b.datagrams);
}

TEST(StreamFrames, FaultsAreCounted) {
  const auto c = testing::SmallConfig();
  {
    CountingSink sink(1);
    auto o = Fast(2);
    o.faults.drop_one_packet_of = {{1, 4}};
    const auto r = StreamFrames(c, o, sink);
    EXPECT_EQ(r.dropped_by_fault, 1u);
    const auto full = wire::PacketsPerSubframe(c.frame, 24);
    EXPECT_EQ((sink.per_subframe_[{1, 4}]), full - 1);
    EXPECT_EQ((sink.per_subframe_[{1, 5}]), full);
  }
  {
    CountingSink sink(1);
    auto o = Fast(3);
    o.faults.duplicate_probability = 0.1;
    o.faults.drop_probability = 0.05;
    const auto r = StreamFrames(c, o, sink);
    EXPECT_GT(r.duplicated_by_fault, 0u);
    EXPECT_GT(r.dropped_by_fault, 0u);
    EXPECT_EQ(sink.datagrams_, r.packets_sent);
    EXPECT_EQ(r.packets_sent, 3u + 3u * 9u * 48u - r.dropped_by_fault + r.duplicated_by_fault);
  }
  {
    CountingSink sink(1);
    auto o = Fast(5);
    o.faults.stop_after_packets = 100;
    const auto r = StreamFrames(c, o, sink);
    EXPECT_TRUE(r.stopped_early);
    EXPECT_EQ(sink.datagrams_, 100u);
  }
}

TEST(StreamFrames, RejectsBadOptions) {
  CountingSink sink(1);
  auto o = Fast(1);
  o.realtime_factor = 0.0;
  EXPECT_THROW(StreamFrames(testing::SmallConfig(), o, sink), ConfigError);
  o = Fast(1);
  o.slot_fill = 1.5;
  EXPECT_THROW(StreamFrames(testing::SmallConfig(), o, sink), ConfigError);
}

TEST(StreamFrames, PacedRunReportsPacingAndTruth) {
  CountingSink sink(1);
  StreamOptions o;
  o.realtime_factor = 0.5;  // 20 ms frames
  o.num_frames = 5;
  o.first_frame_seq = 40;
  const auto c = testing::SmallConfig();
  const auto r = StreamFrames(c, o, sink);
  EXPECT_EQ(r.pacing.samples, 45u);
  EXPECT_LT(r.pacing.mean, 0.05);
  EXPECT_NEAR(r.frame_period_s, 0.02, 1e-12);
  EXPECT_GE(r.wall_time_s, 4 * 0.02);
  EXPECT_EQ(r.truth.first_frame_seq, 40u);
  EXPECT_EQ(r.truth.link_fingerprint, c.LinkFingerprint());

  const auto back = StreamReportFromJson(ToJson(r));
  EXPECT_EQ(ToJson(back), ToJson(r));
  EXPECT_THROW(StreamReportFromJson(nlohmann::json::object()), ConfigError);
}

}  // namespace
}  // namespace rapro::frontend
