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
#include "rapro/phy/channel_estimation.h"

#include <algorithm>
#include <string>

#include "rapro/common/error.h"

namespace rapro {

namespace {

void CheckPilotView(const SymbolView& rx, const FrameConfig& cfg) {
  if (rx.num_rows() != cfg.num_bs_antennas ||
      rx.num_subcarriers() != cfg.used_subcarriers) {
    throw LengthError("pilot symbol is " + std::to_string(rx.num_rows()) +
                      " x " + std::to_string(rx.num_subcarriers()) +
                      ", expected " + std::to_string(cfg.num_bs_antennas) +
                      " x " + std::to_string(cfg.used_subcarriers));
  }
  for (const auto& row : rx.rows) {
    if (row.size() != cfg.used_subcarriers) {
      throw LengthError("ragged pilot symbol view");
    }
  }
}

}  // namespace

SparseChannelEstimate LsEstimate(const SymbolView& rx_pilot,
                                 const FrameConfig& cfg,
                                 const PilotSet& pilots) {
  CheckPilotView(rx_pilot, cfg);
  const std::size_t M = cfg.num_bs_antennas;
  const std::size_t K = cfg.num_users;
  SparseChannelEstimate est(M, K, cfg.used_subcarriers);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t j = 0; j < est.comb_length(); ++j) {
      const std::size_t n = est.position(k, j);
      const cdouble p = pilots.value(n);
      if (p == cdouble{}) {
        throw InternalError("zero pilot at subcarrier " + std::to_string(n));
      }
      const cdouble inv = 1.0 / p;
      for (std::size_t m = 0; m < M; ++m) {
        est.at(m, k, j) = rx_pilot.rows[m][n] * inv;
      }
    }
  }
  return est;
}

ChannelEstimate InterpolateChannel(const SparseChannelEstimate& sparse) {
  ChannelEstimate out;
  InterpolateChannelInto(sparse, out.h);
  return out;
}

void InterpolateChannelInto(const SparseChannelEstimate& sparse, MatrixStack& h) {
  if (sparse.empty()) {
    throw LengthError("cannot interpolate an empty channel estimate");
  }
  const std::size_t M = sparse.num_antennas();
  const std::size_t K = sparse.num_users();
  const std::size_t N = sparse.num_subcarriers();
  const std::size_t J = sparse.comb_length();
  if (h.count() != N || h.rows() != M || h.cols() != K) h = MatrixStack(N, M, K);

  for (std::size_t k = 0; k < K; ++k) {
    const std::size_t first = sparse.position(k, 0);
    const std::size_t last = sparse.position(k, J - 1);
    const cdouble* head = sparse.column(k, 0);
    const cdouble* tail = sparse.column(k, J - 1);
    for (std::size_t n = 0; n < first; ++n) {
      std::copy_n(head, M, h.matrix(n).data() + k * M);
    }
    for (std::size_t n = last; n < N; ++n) {
      std::copy_n(tail, M, h.matrix(n).data() + k * M);
    }
    for (std::size_t j = 0; j + 1 < J; ++j) {
      const cdouble* a = sparse.column(k, j);
      const cdouble* b = sparse.column(k, j + 1);
      const std::size_t n0 = sparse.position(k, j);
      for (std::size_t d = 0; d < K; ++d) {
        const double t = static_cast<double>(d) / static_cast<double>(K);
        cdouble* dst = h.matrix(n0 + d).data() + k * M;
        for (std::size_t m = 0; m < M; ++m) {
          dst[m] = {a[m].real() + t * (b[m].real() - a[m].real()),
                    a[m].imag() + t * (b[m].imag() - a[m].imag())};
        }
      }
    }
  }
}

double EstimateNoiseVariance(const SymbolView& rx_pilot,
                             const SparseChannelEstimate& ls,
                             const PilotSet& pilots, const FrameConfig& cfg,
                             double floor) {
  CheckPilotView(rx_pilot, cfg);
  const std::size_t J = ls.comb_length();
  if (J < 3) return floor;
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t k = 0; k < ls.num_users(); ++k) {
    for (std::size_t m = 0; m < ls.num_antennas(); ++m) {
      for (std::size_t j = 1; j + 1 < J; ++j) {
        const std::size_t n = ls.position(k, j);
        const cdouble predicted = 0.5 * (ls.at(m, k, j - 1) + ls.at(m, k, j + 1));
        sum += std::norm(rx_pilot.rows[m][n] - predicted * pilots.value(n));
        ++count;
      }
    }
  }
  const double estimate = sum / static_cast<double>(count) / 1.5;
  return std::max(estimate, floor);
}

}  // namespace rapro
