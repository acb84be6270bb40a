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
 * @file analytics_test.cc
 * @brief Rate and duty arithmetic, run scoring and constellation export.
 */
#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "loopback.h"
#include "rapro/analytics/budget.h"
#include "rapro/analytics/score.h"
#include "rapro/common/error.h"
#include "rapro/frontend/uplink.h"
#include "rapro/phy/metrics.h"
#include "test_util.h"

namespace rapro::analytics {
namespace {

using testing::Frames;
using testing::QuietPipeline;
using testing::RunLoopback;

TEST(RateBudget, Defaults) {
  const FrameConfig cfg;
  const RateReport one = RateBudget(cfg);
  EXPECT_EQ(one.bytes_per_frame, 4'147'200u);
  EXPECT_NEAR(one.megabytes_per_s, 414.72, 1e-9);
  EXPECT_NEAR(one.per_port_gbps, 3.31776, 1e-12);
  const RateReport two = RateBudget(cfg, 2);
  EXPECT_NEAR(two.per_port_gbps, 1.65888, 1e-12);
}

TEST(RateBudget, LargeArray) {
  FrameConfig cfg;
  cfg.num_bs_antennas = 128;
  const RateReport r = RateBudget(cfg, 4);
  EXPECT_NEAR(r.megabytes_per_s, 3317.76, 1e-9);
  EXPECT_NEAR(r.per_port_gbps, 6.63552, 1e-12);
}

TEST(RateBudget, ZeroAntennasAndErrors) {
  FrameConfig cfg;
  cfg.num_bs_antennas = 0;
  EXPECT_EQ(RateBudget(cfg).bytes_per_frame, 0u);
  EXPECT_EQ(RateBudget(cfg).megabytes_per_s, 0.0);
  EXPECT_THROW(RateBudget(FrameConfig{}, 0), ConfigError);
  FrameConfig bad;
  bad.frame_duration = 0;
  EXPECT_THROW(RateBudget(bad), ConfigError);
}

TEST(RateBudget, LinearInAntennasAndDataSymbols) {
  FrameConfig base;
  const double r1 = RateBudget(base).megabytes_per_s;
  for (std::size_t m : {1u, 3u, 32u, 64u}) {
    FrameConfig c = base;
    c.num_bs_antennas = m;
    EXPECT_NEAR(RateBudget(c).megabytes_per_s, r1 * m / 16.0, 1e-9);
  }
  // Doubling symbols per slot doubles the symbols per frame.
  FrameConfig c = base;
  c.data_symbols_per_slot = 5;  // 6 symbols per slot instead of 3
  EXPECT_NEAR(RateBudget(c).megabytes_per_s, 2 * r1, 1e-9);
}

TEST(DutyCycle, TableRows) {
  struct Row {
    double cycles, ms, percent;
  };
  for (const Row& r : {Row{4.806e6, 1.716, 17.16}, Row{6.128e6, 2.189, 21.89},
                       Row{23.264e6, 8.309, 83.09}}) {
    const DutyReport d = DutyCycle(r.cycles, 2.8e9, 0.01);
    EXPECT_NEAR(d.time_s * 1e3, r.ms, 5e-4) << r.cycles;
    EXPECT_NEAR(d.duty_fraction * 100, r.percent, 5e-3) << r.cycles;
  }
}

TEST(DutyCycle, ZeroAdditivityAndErrors) {
  EXPECT_EQ(DutyCycle(0, 2.8e9, 0.01).duty_fraction, 0.0);
  const double a = DutyCycle(1.5e6, 2.8e9, 0.01).time_s;
  const double b = DutyCycle(2.25e6, 2.8e9, 0.01).time_s;
  EXPECT_NEAR(DutyCycle(3.75e6, 2.8e9, 0.01).time_s, a + b, 1e-18);
  EXPECT_THROW(DutyCycle(1, 0, 0.01), ConfigError);
  EXPECT_THROW(DutyCycle(1, 2.8e9, 0), ConfigError);
  EXPECT_EQ(ToJson(DutyCycle(0, 1, 1)).at("duty_fraction"), 0.0);
}

/// Bits of every (frame, subframe) the capture covers, regenerated through
/// the synthesizer rather than the payload cache the scorer uses.
std::vector<std::uint8_t> TruthBits(const SystemConfig& cfg,
                                    std::vector<wire::ResultRecord> recs, std::size_t user) {
  std::sort(recs.begin(), recs.end(), [](const auto& a, const auto& b) {
    return std::tie(a.frame_seq, a.subframe_idx, a.slot_idx, a.symbol_idx) <
           std::tie(b.frame_seq, b.subframe_idx, b.slot_idx, b.symbol_idx);
  });
  const frontend::FrameSynthesizer synth(cfg);
  const std::size_t n = cfg.frame.used_subcarriers * BitsPerSymbol(cfg.frame.UserModulation(user));
  std::vector<std::uint8_t> out;
  for (const auto& r : recs) {
    if (r.user != user) continue;
    const auto f = synth.Build(r.frame_seq);
    const auto sub = frontend::SubframeBits(cfg.frame, f.payload[user], user, r.subframe_idx);
    const std::size_t off = (r.slot_idx * cfg.frame.data_symbols_per_slot + r.symbol_idx - 1) * n;
    out.insert(out.end(), sub.begin() + off, sub.begin() + off + n);
  }
  return out;
}

std::vector<std::uint8_t> CapturedBits(std::vector<wire::ResultRecord> recs, std::size_t user) {
  std::sort(recs.begin(), recs.end(), [](const auto& a, const auto& b) {
    return std::tie(a.frame_seq, a.subframe_idx, a.slot_idx, a.symbol_idx) <
           std::tie(b.frame_seq, b.subframe_idx, b.slot_idx, b.symbol_idx);
  });
  std::vector<std::uint8_t> out;
  for (const auto& r : recs) {
    if (r.user == user) out.insert(out.end(), r.bits.begin(), r.bits.end());
  }
  return out;
}

TEST(ScoreRun, NoiselessRunScoresZero) {
  const SystemConfig cfg = testing::SmallConfig();
  const auto lb = RunLoopback(cfg, Frames(2), QuietPipeline());
  const auto rep = ScoreRecords(server::ToJson(lb.server), lb.stream, &lb.results);
  EXPECT_TRUE(rep.from_capture);
  ASSERT_EQ(rep.users.size(), 2u);
  for (const auto& u : rep.users) {
    EXPECT_EQ(u.bits, 2u * cfg.frame.UserBitsPerFrame(u.user));
    EXPECT_EQ(u.bit_errors, 0u);
    ASSERT_TRUE(u.evm_percent);
    EXPECT_LT(*u.evm_percent, 0.1);
  }
  EXPECT_TRUE(rep.missing_results.empty());
  EXPECT_TRUE(rep.unseen_frames.empty());
  EXPECT_GT(rep.predicted_duty, 0.0);
  const auto j = ToJson(rep);
  EXPECT_EQ(j.at("source"), "capture");
}

TEST(ScoreRun, BerIsPlainBerOfReconstructedStreams) {
  SystemConfig cfg = testing::SmallConfig();
  cfg.channel = ChannelModel::FlatRayleigh(0.05);
  const auto lb = RunLoopback(cfg, Frames(2), QuietPipeline());
  const auto rep = ScoreRecords(server::ToJson(lb.server), lb.stream, &lb.results);
  for (std::size_t k = 0; k < 2; ++k) {
    const auto truth = TruthBits(cfg, lb.results, k);
    const auto got = CapturedBits(lb.results, k);
    EXPECT_EQ(rep.users[k].ber, ComputeBer(got, truth)) << k;
    EXPECT_EQ(rep.users[k].bits, truth.size());
  }
  EXPECT_GT(rep.users[1].bit_errors, 0u);
}

TEST(ScoreRun, CaptureFileAndReportOnlyPaths) {
  const SystemConfig cfg = testing::SmallConfig();
  auto pc = QuietPipeline();
  pc.score_truth = true;
  const auto lb = RunLoopback(cfg, Frames(1), pc);
  const auto dir = testing::ScratchDir("score");
  {
    wire::CaptureWriter w(dir / "run.cap");
    for (const auto& r : lb.results) w.Append(wire::EncodeResult(r));
  }
  const auto server = server::ToJson(lb.server);
  const auto from_file = ScoreRun(server, lb.stream, dir / "run.cap");
  const auto from_report = ScoreRun(server, lb.stream);
  EXPECT_FALSE(from_report.from_capture);
  for (std::size_t k = 0; k < 2; ++k) {
    EXPECT_EQ(from_file.users[k].bits, from_report.users[k].bits);
    EXPECT_EQ(from_file.users[k].bit_errors, 0u);
  }
  std::filesystem::remove_all(dir);
}

TEST(ScoreRun, DroppedSubframeIsNamed) {
  const SystemConfig cfg = testing::SmallConfig();
  auto so = Frames(3);
  so.faults.drop_one_packet_of = {{2, 7}};
  const auto lb = RunLoopback(cfg, so, QuietPipeline());
  const auto rep = ScoreRecords(server::ToJson(lb.server), lb.stream, &lb.results);
  ASSERT_EQ(rep.missing_results.size(), 1u);
  EXPECT_EQ(rep.missing_results[0], (wire::SubframeKey{2, 7}));
  ASSERT_EQ(rep.incomplete.size(), 1u);
  EXPECT_EQ(rep.incomplete[0], (wire::SubframeKey{2, 7}));
  for (const auto& u : rep.users) EXPECT_EQ(u.bit_errors, 0u);
}

TEST(ScoreRun, ProvenanceMismatchesAreRejected) {
  const SystemConfig cfg = testing::SmallConfig();
  const auto lb = RunLoopback(cfg, Frames(1), QuietPipeline());
  const auto server = server::ToJson(lb.server);

  auto reseeded = lb.stream;
  reseeded.truth.config.seeds.payload += 1;
  EXPECT_THROW(ScoreRecords(server, reseeded, &lb.results), ProvenanceError);

  auto other_link = lb.stream;
  other_link.truth.link_fingerprint = "0000000000000000";
  EXPECT_THROW(ScoreRecords(server, other_link, &lb.results), ProvenanceError);

  auto shifted = lb.stream;
  shifted.truth.first_frame_seq = 5;
  EXPECT_THROW(ScoreRecords(server, shifted, &lb.results), ProvenanceError);

  auto stray = lb.results;
  stray[0].user = 9;
  EXPECT_THROW(ScoreRecords(server, lb.stream, &stray), ProvenanceError);
}

std::vector<cdouble> ReadCsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "i,q");
  std::vector<cdouble> out;
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    out.push_back({std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1))});
  }
  return out;
}

TEST(DumpConstellation, EmptyCaptureIsHeaderOnly) {
  const auto dir = testing::ScratchDir("constellation");
  EXPECT_EQ(DumpConstellation({}, 0, dir / "e.csv"), 0u);
  std::ifstream in(dir / "e.csv");
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(ss.str(), "i,q\n");
  EXPECT_THROW(DumpConstellation({}, 4, dir / "e.csv", 4), LengthError);
  std::filesystem::remove_all(dir);
}

TEST(DumpConstellation, RejectsBadUserAndMissingSymbols) {
  const auto dir = testing::ScratchDir("constellation");
  wire::ResultRecord r;
  r.user = 1;
  r.bits_per_symbol = 2;
  r.bits = {0, 1};
  EXPECT_THROW(DumpConstellation({r}, 2, dir / "x.csv"), LengthError);
  EXPECT_THROW(DumpConstellation({r}, 1, dir / "x.csv"), DomainError);
  std::filesystem::remove_all(dir);
}

TEST(DumpConstellation, NoiselessQpskSitsOnIdealPoints) {
  const SystemConfig cfg = testing::SmallConfig();
  const auto lb = RunLoopback(cfg, Frames(1), QuietPipeline());
  const auto dir = testing::ScratchDir("constellation");
  const std::size_t rows = DumpConstellation(lb.results, 0, dir / "q.csv", 2);
  EXPECT_EQ(rows, cfg.frame.UserBitsPerFrame(0) / 2);
  const auto pts = ReadCsv(dir / "q.csv");
  ASSERT_EQ(pts.size(), rows);
  const double a = 1 / std::sqrt(2.0);
  const cdouble ideal[4] = {{a, a}, {a, -a}, {-a, a}, {-a, -a}};
  double worst = 0;
  for (const auto& p : pts) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : ideal) best = std::min(best, std::abs(p - q));
    worst = std::max(worst, best);
  }
  EXPECT_LT(worst, 1e-3);
  std::filesystem::remove_all(dir);
}

struct Clustering {
  double inertia = 0;
  std::vector<cdouble> centers;
  std::vector<std::size_t> sizes;
};

/// Lloyd's algorithm from k-means++ seeds, best of several restarts.
Clustering KMeans(const std::vector<cdouble>& pts, std::size_t k, int restarts = 8) {
  std::mt19937_64 gen(2024);
  Clustering best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < restarts; ++r) {
    std::vector<cdouble> c{pts[gen() % pts.size()]};
    std::vector<double> d2(pts.size(), std::numeric_limits<double>::infinity());
    while (c.size() < k) {
      for (std::size_t i = 0; i < pts.size(); ++i) d2[i] = std::min(d2[i], std::norm(pts[i] - c.back()));
      std::discrete_distribution<std::size_t> pick(d2.begin(), d2.end());
      c.push_back(pts[pick(gen)]);
    }
    Clustering cur;
    std::vector<std::size_t> label(pts.size());
    for (int iter = 0; iter < 100; ++iter) {
      cur.inertia = 0;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        double bd = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < k; ++j) {
          const double d = std::norm(pts[i] - c[j]);
          if (d < bd) {
            bd = d;
            label[i] = j;
          }
        }
        cur.inertia += bd;
      }
      std::vector<cdouble> sum(k);
      cur.sizes.assign(k, 0);
      for (std::size_t i = 0; i < pts.size(); ++i) {
        sum[label[i]] += pts[i];
        ++cur.sizes[label[i]];
      }
      for (std::size_t j = 0; j < k; ++j) {
        if (cur.sizes[j]) c[j] = sum[j] / static_cast<double>(cur.sizes[j]);
      }
    }
    cur.centers = c;
    if (cur.inertia < best.inertia) best = std::move(cur);
  }
  return best;
}

TEST(DumpConstellation, NoisySixteenQamShowsSixteenClusters) {
  SystemConfig cfg = testing::SmallConfig();
  cfg.frame.num_bs_antennas = 2;
  cfg.channel = ChannelModel::Identity(0.004);
  const auto lb = RunLoopback(cfg, Frames(1), QuietPipeline());
  const auto dir = testing::ScratchDir("constellation");
  DumpConstellation(lb.results, 1, dir / "q16.csv", 2);
  const auto pts = ReadCsv(dir / "q16.csv");
  std::filesystem::remove_all(dir);
  ASSERT_EQ(pts.size(), cfg.frame.UserBitsPerFrame(1) / 4);

  // Sixteen clusters count as recovered when every one is populated and
  // the closest pair of centers is several cluster spreads apart.
  const Clustering c16 = KMeans(pts, 16);
  const double spread = std::sqrt(c16.inertia / static_cast<double>(pts.size()));
  double closest = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < 16; ++a) {
    EXPECT_GT(c16.sizes[a], pts.size() / 64);
    for (std::size_t b = a + 1; b < 16; ++b) {
      closest = std::min(closest, std::abs(c16.centers[a] - c16.centers[b]));
    }
  }
  EXPECT_GT(closest, 4 * spread) << "closest " << closest << " spread " << spread;
  // Seventeen clusters only split noise: some pair of centers ends up close.
  const Clustering c17 = KMeans(pts, 17);
  double closest17 = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < 17; ++a) {
    for (std::size_t b = a + 1; b < 17; ++b) {
      closest17 = std::min(closest17, std::abs(c17.centers[a] - c17.centers[b]));
    }
  }
  EXPECT_LT(closest17, 4 * spread);
}

TEST(ScoreRun, AwgnQpskAtEightDb) {
  const SystemConfig cfg =
      LoadSystemConfig(std::filesystem::path(RAPRO_CONFIG_DIR) / "awgn_qpsk_8db.json");
  const std::size_t frames = 12;
  ASSERT_GE(frames * cfg.frame.UserBitsPerFrame(0), 1'000'000u);
  auto pc = QuietPipeline();
  pc.dump_symbols = false;
  const auto lb = RunLoopback(cfg, Frames(frames, 0.2), pc);
  ASSERT_EQ(lb.server.subframes_processed, frames * 9);
  const auto rep = ScoreRecords(server::ToJson(lb.server), lb.stream, &lb.results);
  const double expected = testing::QpskBer(8.0);
  EXPECT_NEAR(rep.users[0].ber, expected, 0.15 * expected)
      << rep.users[0].bit_errors << " errors in " << rep.users[0].bits;
}

}  // namespace
}  // namespace rapro::analytics
