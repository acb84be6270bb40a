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
#include "rapro/frontend/uplink.h"

#include <algorithm>
#include <iterator>
#include <string>

#include "rapro/common/error.h"
#include "rapro/common/rng.h"
#include "rapro/phy/modulation.h"
#include "rapro/wire/packet.h"

namespace rapro::frontend {

Bits GeneratePayload(const FrameConfig& cfg, std::uint64_t payload_seed,
                     std::uint32_t frame_seq, std::size_t user) {
  Rng rng(DeriveSeed(payload_seed, 0x7061796cULL, frame_seq, user));
  return rng.Bits(cfg.UserBitsPerFrame(user));
}

std::span<const std::uint8_t> SubframeBits(const FrameConfig& cfg,
                                           std::span<const std::uint8_t> frame_bits,
                                           std::size_t user,
                                           std::size_t subframe_idx) {
  const std::size_t per_subframe = cfg.UserBitsPerSubframe(user);
  if (subframe_idx < 1 || subframe_idx > cfg.DataSubframes() ||
      frame_bits.size() != cfg.UserBitsPerFrame(user)) {
    throw LengthError("subframe slice out of range");
  }
  return frame_bits.subspan((subframe_idx - 1) * per_subframe, per_subframe);
}

std::vector<ResourceGrid> BuildUplinkFrame(const FrameConfig& cfg,
                                           const std::vector<Bits>& payload,
                                           const PilotSet& pilots) {
  cfg.Validate();
  if (payload.size() != cfg.num_users) {
    throw LengthError("payload given for " + std::to_string(payload.size()) +
                      " users, expected " + std::to_string(cfg.num_users));
  }
  const std::size_t N = cfg.used_subcarriers;
  std::vector<ResourceGrid> grids;
  grids.reserve(cfg.num_users);
  for (std::size_t k = 0; k < cfg.num_users; ++k) {
    const std::size_t expected = cfg.UserBitsPerFrame(k);
    if (payload[k].size() != expected) {
      throw LengthError("user " + std::to_string(k) + " payload has " +
                        std::to_string(payload[k].size()) + " bits, expected " +
                        std::to_string(expected));
    }
    const auto symbols = QamModulate(payload[k], cfg.UserModulation(k));
    ResourceGrid grid(1, cfg.SymbolsPerFrame(), N);
    std::size_t next = 0;
    for (std::size_t sf = 1; sf <= cfg.DataSubframes(); ++sf) {
      for (std::size_t slot = 0; slot < cfg.slots_per_subframe; ++slot) {
        const auto pilot = pilots.grid(k).row(0, 0);
        auto pilot_row = grid.row(0, cfg.FrameSymbol(sf, slot, 0));
        std::copy(pilot.begin(), pilot.end(), pilot_row.begin());
        for (std::size_t d = 1; d <= cfg.data_symbols_per_slot; ++d) {
          auto row = grid.row(0, cfg.FrameSymbol(sf, slot, d));
          std::copy_n(symbols.begin() + static_cast<std::ptrdiff_t>(next), N, row.begin());
          next += N;
        }
      }
    }
    grids.push_back(std::move(grid));
  }
  return grids;
}

std::uint64_t FrameChannelSeed(std::uint64_t channel_seed, std::uint32_t frame_seq) {
  return DeriveSeed(channel_seed, 0x6672616dULL, frame_seq);
}

std::uint64_t SymbolNoiseSeed(std::uint64_t noise_seed, std::uint32_t frame_seq,
                              std::size_t subframe_idx, std::size_t symbol) {
  return DeriveSeed(noise_seed, frame_seq, subframe_idx, symbol);
}

namespace {

const SystemConfig& Validated(const SystemConfig& config) {
  config.Validate();
  return config;
}

}  // namespace

FrameSynthesizer::FrameSynthesizer(SystemConfig config)
    : config_(std::move(config)),
      pilots_(Validated(config_).frame, config_.seeds.pilot) {}

SynthesizedFrame FrameSynthesizer::Build(std::uint32_t frame_seq) const {
  const FrameConfig& cfg = config_.frame;
  SynthesizedFrame f;
  f.frame_seq = frame_seq;
  for (std::size_t k = 0; k < cfg.num_users; ++k) {
    f.payload.push_back(GeneratePayload(cfg, config_.seeds.payload, frame_seq, k));
  }
  f.channel = GenerateChannel(config_.channel, cfg,
                              FrameChannelSeed(config_.seeds.channel, frame_seq));
  f.user_grids = BuildUplinkFrame(cfg, f.payload, pilots_);
  return f;
}

ResourceGrid FrameSynthesizer::ReceiveSubframe(const SynthesizedFrame& frame,
                                               std::size_t subframe_idx) const {
  const FrameConfig& cfg = config_.frame;
  const std::size_t S = cfg.SymbolsPerSubframe();
  const std::size_t first = cfg.FrameSymbol(subframe_idx, 0, 0);
  const double noise = config_.channel.noise_var;
  ResourceGrid out(cfg.num_bs_antennas, S, cfg.used_subcarriers);
  for (std::size_t s = 0; s < S; ++s) {
    const bool pilot = (s % cfg.SymbolsPerSlot()) == 0;
    const double var = (pilot && !config_.pilot_noise) ? 0.0 : noise;
    const ResourceGrid y = ApplyChannel(
        frame.user_grids, frame.channel, var,
        SymbolNoiseSeed(config_.seeds.noise, frame.frame_seq, subframe_idx, s),
        first + s, 1);
    for (std::size_t m = 0; m < cfg.num_bs_antennas; ++m) {
      auto src = y.row(m, 0);
      auto dst = out.row(m, s);
      std::copy(src.begin(), src.end(), dst.begin());
    }
  }
  const double gain = config_.EffectiveGain();
  for (auto& v : out.data()) v *= gain;
  return out;
}

std::vector<std::vector<std::uint8_t>> FrameSynthesizer::SubframePackets(
    const SynthesizedFrame& frame, std::size_t subframe_idx) const {
  return wire::EncodePackets(ReceiveSubframe(frame, subframe_idx), frame.frame_seq,
                             static_cast<std::uint8_t>(subframe_idx), config_.frame,
                             config_.wire.samples_per_packet);
}

PayloadCache::PayloadCache(FrameConfig cfg, std::uint64_t payload_seed,
                           std::size_t capacity)
    : cfg_(std::move(cfg)), seed_(payload_seed), capacity_(std::max<std::size_t>(capacity, 1)) {}

std::span<const std::uint8_t> PayloadCache::Subframe(std::uint32_t frame_seq,
                                                     std::size_t subframe_idx,
                                                     std::size_t user) {
  if (user >= cfg_.num_users) throw LengthError("user index out of range");
  auto it = std::find_if(frames_.begin(), frames_.end(),
                         [&](const auto& f) { return f.first == frame_seq; });
  if (it == frames_.end()) {
    if (frames_.size() == capacity_) frames_.erase(frames_.begin());
    std::vector<Bits> bits;
    for (std::size_t k = 0; k < cfg_.num_users; ++k) {
      bits.push_back(GeneratePayload(cfg_, seed_, frame_seq, k));
    }
    frames_.emplace_back(frame_seq, std::move(bits));
    it = std::prev(frames_.end());
  }
  return SubframeBits(cfg_, it->second[user], user, subframe_idx);
}

}  // namespace rapro::frontend
