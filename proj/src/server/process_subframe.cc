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
#include "rapro/server/process_subframe.h"

#include <chrono>
#include <string>

#if defined(__x86_64__) || defined(__i386__)
#include <x86intrin.h>
#endif

#include "rapro/common/error.h"
#include "rapro/phy/channel_estimation.h"
#include "rapro/phy/lmmse.h"
#include "rapro/phy/modulation.h"

namespace rapro::server {

std::optional<std::uint64_t> ReadCycleCounter() {
#if defined(__x86_64__) || defined(__i386__)
  return __rdtsc();
#else
  return std::nullopt;
#endif
}

DetectionResult ProcessSubframe(const SubframeBundle& bundle, const FrameConfig& cfg,
                                const PilotSet& pilots, const ReceiverConfig& receiver) {
  using Clock = std::chrono::steady_clock;
  const auto t_start = Clock::now();
  const auto c_start = ReadCycleCounter();

  const std::size_t M = cfg.num_bs_antennas;
  const std::size_t K = cfg.num_users;
  const std::size_t N = cfg.used_subcarriers;
  const std::size_t D = cfg.data_symbols_per_slot;
  if (bundle.num_antennas() != M || bundle.num_subcarriers() != N ||
      bundle.num_symbols() != cfg.SymbolsPerSubframe()) {
    throw LengthError("subframe geometry does not match the frame config");
  }

  DetectionResult out;
  out.key = bundle.key();
  out.users.resize(K);
  for (std::size_t k = 0; k < K; ++k) {
    out.users[k].modulation = cfg.UserModulation(k);
    out.users[k].symbols.assign(cfg.DataSymbolsPerSubframe() * N, cdouble{});
  }

  // Per-thread scratch for the dense estimate; each worker reuses its own.
  thread_local MatrixStack h;
  LmmseFilter filter;
  std::vector<cdouble> x(K);
  std::vector<SymbolView> data_views(D);
  for (std::size_t slot = 0; slot < cfg.slots_per_subframe; ++slot) {
    const SymbolView pilot = bundle.Symbol(cfg.SubframeSymbol(slot, 0));
    const SparseChannelEstimate ls = LsEstimate(pilot, cfg, pilots);
    InterpolateChannelInto(ls, h);
    const double noise_var =
        receiver.noise_var_override
            ? *receiver.noise_var_override
            : EstimateNoiseVariance(pilot, ls, pilots, cfg, receiver.noise_var_min);
    out.slot_noise_var.push_back(noise_var);
    for (std::size_t d = 0; d < D; ++d) {
      data_views[d] = bundle.Symbol(cfg.SubframeSymbol(slot, d + 1));
    }

    std::size_t erased = 0;
    for (std::size_t n = 0; n < N; ++n) {
      try {
        filter.Factor(h.matrix(n), M, K, noise_var, n);
      } catch (const SingularMatrixError&) {
        ++erased;
        continue;
      }
      for (std::size_t d = 0; d < D; ++d) {
        filter.ApplyColumn(data_views[d], n, x);
        const std::size_t pos = (slot * D + d) * N + n;
        for (std::size_t k = 0; k < K; ++k) out.users[k].symbols[pos] = x[k];
      }
    }
    out.slot_erased.push_back(erased);
    out.erased_subcarriers += erased;
  }

  for (auto& user : out.users) {
    user.bits.resize(user.symbols.size() * BitsPerSymbol(user.modulation));
    QamDemodulateInto(user.symbols, user.modulation, user.bits);
  }

  const auto c_end = ReadCycleCounter();
  out.processing_time_s = std::chrono::duration<double>(Clock::now() - t_start).count();
  if (c_start && c_end) out.tsc_cycles = *c_end - *c_start;
  out.derived_cycles = out.processing_time_s * cfg.cpu_clock_hz;
  return out;
}

std::vector<wire::ResultRecord> ToResultRecords(const DetectionResult& result,
                                                const FrameConfig& cfg,
                                                bool include_symbols) {
  const std::size_t N = cfg.used_subcarriers;
  const std::size_t D = cfg.data_symbols_per_slot;
  std::vector<wire::ResultRecord> records;
  for (std::size_t slot = 0; slot < result.slot_noise_var.size(); ++slot) {
    for (std::size_t d = 0; d < D; ++d) {
      for (std::size_t k = 0; k < result.users.size(); ++k) {
        const UserDetection& u = result.users[k];
        const std::size_t bps = BitsPerSymbol(u.modulation);
        const std::size_t first = (slot * D + d) * N;
        wire::ResultRecord r;
        r.frame_seq = result.key.frame_seq;
        r.subframe_idx = result.key.subframe_idx;
        r.slot_idx = static_cast<std::uint8_t>(slot);
        r.symbol_idx = static_cast<std::uint8_t>(d + 1);
        r.user = static_cast<std::uint8_t>(k);
        r.bits_per_symbol = static_cast<std::uint8_t>(bps);
        r.erased_count = static_cast<std::uint16_t>(result.slot_erased[slot]);
        r.noise_var = static_cast<float>(result.slot_noise_var[slot]);
        r.bits.assign(u.bits.begin() + static_cast<std::ptrdiff_t>(first * bps),
                      u.bits.begin() + static_cast<std::ptrdiff_t>((first + N) * bps));
        if (include_symbols) {
          r.symbols.assign(u.symbols.begin() + static_cast<std::ptrdiff_t>(first),
                           u.symbols.begin() + static_cast<std::ptrdiff_t>(first + N));
        }
        records.push_back(std::move(r));
      }
    }
  }
  return records;
}

}  // namespace rapro::server
