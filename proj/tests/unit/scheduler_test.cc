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
 * @file scheduler_test.cc
 * @brief Dispatch rules of the main scheduler: part joins, index affinity,
 * the depth-1 drop-oldest queue and abandonment.
 */
#include <gtest/gtest.h>

#include <random>

#include "rapro/common/error.h"
#include "rapro/server/scheduler.h"
#include "rapro/wire/assembler.h"
#include "rapro/wire/packet.h"

namespace rapro::server {
namespace {

/// Tiny geometry so buffers are cheap: 4 antennas, 12 subcarriers, one
/// fragment per row.
FrameConfig Tiny() {
  FrameConfig c;
  c.num_bs_antennas = 4;
  c.num_users = 1;
  c.used_subcarriers = 12;
  c.fft_size = 16;
  c.modulation = {Modulation::kQpsk};
  return c;
}

/// Complete per-port buffers for `key`, one per part, built by feeding real
/// packets through strided assemblers.
std::vector<std::unique_ptr<wire::SubframeBuffer>> Parts(SubframeKey key, std::size_t parts) {
  const FrameConfig cfg = Tiny();
  ResourceGrid grid(4, cfg.SymbolsPerSubframe(), 12);
  for (std::size_t i = 0; i < grid.size(); ++i) grid.data()[i] = {0.001 * (i % 97), -0.5};
  const auto packets = wire::EncodePackets(grid, key.frame_seq, key.subframe_idx, cfg, 12);
  std::vector<std::unique_ptr<wire::SubframeBuffer>> out(parts);
  for (std::size_t p = 0; p < parts; ++p) {
    wire::Assembler a(wire::AssemblerConfig::From(cfg, 12, parts, p));
    for (const auto& bytes : packets) {
      const auto d = wire::DecodePacket(bytes);
      if (d.header.antenna_idx % parts != p) continue;
      auto o = a.Feed(d, {});
      if (o.completed) out[p] = std::move(o.completed);
    }
  }
  return out;
}

/// Feeds every part of `key`; returns the actions of the completing part.
SchedulerActions Deliver(DispatchScheduler& s, SubframeKey key, std::size_t parts = 2) {
  auto bufs = Parts(key, parts);
  SchedulerActions last;
  for (std::size_t p = 0; p < parts; ++p) last = s.OnPartComplete(p, std::move(bufs[p]), {});
  return last;
}

TEST(Scheduler, NineSubframesNineIndexMatchedDispatches) {
  DispatchScheduler s(2, 4, 9);
  std::size_t dispatches = 0;
  for (std::uint8_t sf = 1; sf <= 9; ++sf) {
    auto a = Deliver(s, {0, sf});
    ASSERT_EQ(a.dispatches.size(), 1u);
    EXPECT_EQ(a.dispatches[0].worker, sf);
    EXPECT_EQ(a.dispatches[0].bundle->key().subframe_idx, sf);
    EXPECT_EQ(a.dispatches[0].bundle->num_antennas(), 4u);
    ++dispatches;
  }
  EXPECT_EQ(dispatches, 9u);
  EXPECT_EQ(s.stats().dispatches, 9u);
  for (std::size_t w = 1; w <= 9; ++w) EXPECT_EQ(s.stats().dispatches_per_worker[w], 1u);
}

TEST(Scheduler, BundleRowsFollowGlobalAntennaOrder) {
  DispatchScheduler s(2, 4, 9);
  auto a = Deliver(s, {3, 2});
  ASSERT_EQ(a.dispatches.size(), 1u);
  const auto& b = *a.dispatches[0].bundle;
  const auto view = b.Symbol(4);
  // Value pattern of Parts(): sample index i within the full grid.
  for (std::size_t m = 0; m < 4; ++m) {
    const std::size_t i = (m * 6 + 4) * 12 + 5;
    EXPECT_NEAR(view.rows[m][5].real(), 0.001 * (i % 97), 1.0 / 32768);
  }
}

TEST(Scheduler, NoDispatchUntilAllPartsArrive) {
  DispatchScheduler s(2, 4, 9);
  auto bufs = Parts({0, 5}, 2);
  EXPECT_TRUE(s.OnPartComplete(1, std::move(bufs[1]), {}).dispatches.empty());
  EXPECT_EQ(s.open_joins(), 1u);
  EXPECT_EQ(s.OnPartComplete(0, std::move(bufs[0]), {}).dispatches.size(), 1u);
  EXPECT_EQ(s.open_joins(), 0u);
}

TEST(Scheduler, QueueDepthOneDropOldest) {
  DispatchScheduler s(2, 4, 9);
  EXPECT_EQ(Deliver(s, {0, 3}).dispatches.size(), 1u);  // worker 3 busy
  auto q1 = Deliver(s, {1, 3});
  EXPECT_TRUE(q1.dispatches.empty());
  EXPECT_TRUE(q1.dropped.empty());
  EXPECT_EQ(s.queue_depth(3), 1u);
  auto q2 = Deliver(s, {2, 3});  // third pending: the queued one is dropped
  ASSERT_EQ(q2.dropped.size(), 1u);
  EXPECT_EQ(q2.dropped[0], (SubframeKey{1, 3}));
  EXPECT_EQ(s.queue_depth(3), 1u);
  EXPECT_EQ(s.stats().dropped, 1u);
  EXPECT_EQ(s.stats().max_queue_depth, 1u);

  auto done = s.OnWorkerDone(3);
  ASSERT_EQ(done.dispatches.size(), 1u);
  EXPECT_EQ(done.dispatches[0].bundle->key(), (SubframeKey{2, 3}));
  EXPECT_EQ(s.queue_depth(3), 0u);
  EXPECT_TRUE(s.busy(3));
  EXPECT_TRUE(s.OnWorkerDone(3).dispatches.empty());
  EXPECT_TRUE(s.Idle());
  EXPECT_THROW(s.OnWorkerDone(3), InternalError);
}

TEST(Scheduler, RandomTrafficNeverExceedsDepthOne) {
  DispatchScheduler s(1, 4, 9);
  std::mt19937_64 gen(5);
  std::vector<bool> busy(10, false);
  std::size_t dispatched = 0, dropped = 0, delivered = 0;
  for (std::uint32_t f = 0; f < 30; ++f) {
    for (std::uint8_t sf = 1; sf <= 9; ++sf) {
      auto a = Deliver(s, {f, sf}, 1);
      ++delivered;
      for (auto& d : a.dispatches) {
        EXPECT_EQ(d.worker, d.bundle->key().subframe_idx);
        ++dispatched;
      }
      dropped += a.dropped.size();
      for (std::size_t w = 1; w <= 9; ++w) EXPECT_LE(s.queue_depth(w), 1u);
      // Workers finish at random.
      for (std::size_t w = 1; w <= 9; ++w) {
        if (s.busy(w) && gen() % 3 == 0) {
          for (auto& d : s.OnWorkerDone(w).dispatches) {
            EXPECT_EQ(d.worker, w);
            ++dispatched;
          }
        }
      }
    }
  }
  std::size_t queued = 0;
  for (std::size_t w = 1; w <= 9; ++w) queued += s.queue_depth(w);
  EXPECT_EQ(delivered, dispatched + dropped + queued);
  EXPECT_EQ(s.stats().dropped, dropped);
}

TEST(Scheduler, IncompletePartAbandonsJoinAndLatePartsAreCounted) {
  DispatchScheduler s(2, 4, 9);
  auto bufs = Parts({4, 6}, 2);
  s.OnPartComplete(0, std::move(bufs[0]), {});
  auto a = s.OnPartIncomplete({4, 6});
  ASSERT_EQ(a.abandoned.size(), 1u);
  EXPECT_EQ(a.abandoned[0], (SubframeKey{4, 6}));
  EXPECT_TRUE(s.OnPartComplete(1, std::move(bufs[1]), {}).dispatches.empty());
  EXPECT_EQ(s.stats().late_parts, 1u);

  // Incomplete reported before any part arrived.
  auto b = s.OnPartIncomplete({4, 7});
  EXPECT_EQ(b.abandoned.size(), 1u);
  EXPECT_TRUE(Deliver(s, {4, 7}).dispatches.empty());
  EXPECT_EQ(s.stats().abandoned, 2u);
}

TEST(Scheduler, DuplicateCompletionNeverDispatchesTwice) {
  DispatchScheduler s(1, 4, 9);
  EXPECT_EQ(Deliver(s, {0, 1}, 1).dispatches.size(), 1u);
  EXPECT_TRUE(Deliver(s, {0, 1}, 1).dispatches.empty());
  EXPECT_EQ(s.stats().dispatches, 1u);
  EXPECT_EQ(s.stats().late_parts, 1u);
}

TEST(Scheduler, AbandonBeforeAndAll) {
  DispatchScheduler s(2, 4, 9);
  auto p1 = Parts({1, 1}, 2);
  auto p2 = Parts({2, 2}, 2);
  auto p3 = Parts({3, 3}, 2);
  s.OnPartComplete(0, std::move(p1[0]), {});
  s.OnPartComplete(0, std::move(p2[0]), {});
  s.OnPartComplete(0, std::move(p3[0]), {});
  auto a = s.AbandonBefore(3);
  EXPECT_EQ(a.abandoned.size(), 2u);
  EXPECT_EQ(s.open_joins(), 1u);
  // A part for a frame below the floor is late.
  EXPECT_TRUE(s.OnPartComplete(1, std::move(p1[1]), {}).dispatches.empty());
  EXPECT_EQ(s.stats().late_parts, 1u);
  EXPECT_EQ(s.AbandonAll().abandoned.size(), 1u);
  EXPECT_EQ(s.open_joins(), 0u);
}

TEST(Scheduler, RejectsBadSetup) {
  EXPECT_THROW(DispatchScheduler(0, 4, 9), ConfigError);
  DispatchScheduler s(2, 4, 9);
  EXPECT_THROW(s.OnPartComplete(2, nullptr, {}), InternalError);
}

TEST(SubframeBundle, RejectsMissingAntenna) {
  auto parts = Parts({0, 1}, 2);
  parts.pop_back();
  EXPECT_THROW(SubframeBundle({0, 1}, std::move(parts), 4, {}), InternalError);
  auto mislabeled = Parts({0, 1}, 2);
  EXPECT_THROW(SubframeBundle({0, 2}, std::move(mislabeled), 4, {}), InternalError);
}

TEST(SubframeBundle, TakesOwnershipOfParts) {
  auto parts = Parts({0, 1}, 2);
  const wire::SubframeBuffer* raw = parts[0].get();
  SubframeBundle b({0, 1}, std::move(parts), 4, {});
  EXPECT_EQ(raw->owner(), wire::SubframeBuffer::Owner::kProcessing);
  EXPECT_EQ(b.payload_bytes(), 4u * 6u * 12u * 4u);
}

}  // namespace
}  // namespace rapro::server
