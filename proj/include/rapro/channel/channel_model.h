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
 * @file channel_model.h
 * @brief Ground-truth uplink MIMO channels and their application to
 * per-user transmit grids.
 *
 * A realization is block-constant over one 10 ms frame. Tapped-delay-line
 * taps are drawn i.i.d. CN(0, p_l) per (antenna, user) and evaluated as
 * H[n](m, k) = sum_l g_l exp(-j 2 pi n l / fft_size).
 */
#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "rapro/phy/frame_config.h"
#include "rapro/phy/resource_grid.h"

namespace rapro {

enum class ChannelKind { kIdentity, kFlatRayleigh, kTappedDelayLine };

std::string_view ToString(ChannelKind kind);
ChannelKind ParseChannelKind(std::string_view name);

struct ChannelModel {
  ChannelKind kind = ChannelKind::kTappedDelayLine;
  /// Tap power profile for kTappedDelayLine; must sum to 1.
  std::vector<double> tap_powers = {0.25, 0.25, 0.25, 0.25};
  /// Complex AWGN variance per receive antenna and resource element.
  double noise_var = 0.0;

  std::size_t num_taps() const { return tap_powers.size(); }

  /// Throws ConfigError when the model cannot be realized for `cfg`.
  void Validate(const FrameConfig& cfg) const;

  static ChannelModel Identity(double noise_var = 0.0);
  static ChannelModel FlatRayleigh(double noise_var = 0.0);
  static ChannelModel TappedDelayLine(std::size_t num_taps,
                                      double noise_var = 0.0);
};

struct ChannelRealization {
  MatrixStack h;  // used_subcarriers x (M x K)
  ChannelKind kind = ChannelKind::kIdentity;
  std::uint64_t seed = 0;
  /// TDL taps, index (m * K + k) * L + l; empty for other kinds.
  std::vector<cdouble> taps;
  std::size_t num_taps = 0;
};

ChannelRealization GenerateChannel(const ChannelModel& model,
                                   const FrameConfig& cfg, std::uint64_t seed);

/// Debug variant evaluating the same draws on all fft_size bins.
ChannelRealization GenerateChannelFullGrid(const ChannelModel& model,
                                           const FrameConfig& cfg,
                                           std::uint64_t seed);

/// y[n, s] = H[n] x[n, s] + w, w ~ CN(0, noise_var I_M), for symbols
/// [first_symbol, first_symbol + num_symbols) of the per-user grids
/// (each 1 x S x N_sc). Returns an M x num_symbols x N_sc grid.
ResourceGrid ApplyChannel(std::span<const ResourceGrid> tx_per_user,
                          const ChannelRealization& channel, double noise_var,
                          std::uint64_t noise_seed, std::size_t first_symbol,
                          std::size_t num_symbols);

/// Whole-grid convenience overload.
ResourceGrid ApplyChannel(std::span<const ResourceGrid> tx_per_user,
                          const ChannelRealization& channel, double noise_var,
                          std::uint64_t noise_seed);

}  // namespace rapro
