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
 * @file channel_estimation.h
 * @brief LS channel estimation on the pilot combs, linear interpolation in
 * frequency, and pilot-residual noise-variance estimation.
 */
#pragma once

#include <cstddef>
#include <vector>

#include "rapro/phy/frame_config.h"
#include "rapro/phy/pilots.h"
#include "rapro/phy/resource_grid.h"

namespace rapro {

/// LS estimates on each user's comb. Entry (m, k, j) is the estimate for
/// antenna m, user k at subcarrier k + j * K.
class SparseChannelEstimate {
 public:
  SparseChannelEstimate() = default;
  SparseChannelEstimate(std::size_t num_antennas, std::size_t num_users,
                        std::size_t num_subcarriers)
      : antennas_(num_antennas),
        users_(num_users),
        subcarriers_(num_subcarriers),
        comb_len_(num_users ? num_subcarriers / num_users : 0),
        values_(num_antennas * num_users * comb_len_) {}

  std::size_t num_antennas() const { return antennas_; }
  std::size_t num_users() const { return users_; }
  std::size_t num_subcarriers() const { return subcarriers_; }
  std::size_t comb_length() const { return comb_len_; }
  bool empty() const { return values_.empty(); }

  /// Subcarrier index of comb point j for user k.
  std::size_t position(std::size_t k, std::size_t j) const {
    return k + j * users_;
  }

  /// Antenna m varies fastest, matching the dense per-subcarrier layout.
  cdouble& at(std::size_t m, std::size_t k, std::size_t j) {
    return values_[(k * comb_len_ + j) * antennas_ + m];
  }
  const cdouble& at(std::size_t m, std::size_t k, std::size_t j) const {
    return values_[(k * comb_len_ + j) * antennas_ + m];
  }
  /// The M estimates of comb point j for user k.
  const cdouble* column(std::size_t k, std::size_t j) const {
    return values_.data() + (k * comb_len_ + j) * antennas_;
  }

 private:
  std::size_t antennas_ = 0;
  std::size_t users_ = 0;
  std::size_t subcarriers_ = 0;
  std::size_t comb_len_ = 0;
  std::vector<cdouble> values_;
};

/// Dense per-subcarrier M x K estimate.
struct ChannelEstimate {
  MatrixStack h;
  std::size_t source_subframe = 0;
  double noise_var = 0.0;
};

/// H(m, k) at subcarrier n = Y[n](m) / P_k[n] on user k's comb.
SparseChannelEstimate LsEstimate(const SymbolView& rx_pilot,
                                 const FrameConfig& cfg,
                                 const PilotSet& pilots);

/// Per-(m, k) linear interpolation of real and imaginary parts across the
/// comb, holding the nearest comb value beyond the first/last comb point.
ChannelEstimate InterpolateChannel(const SparseChannelEstimate& sparse);
/// InterpolateChannel writing into `h`, which is reused when its shape
/// already matches.
void InterpolateChannelInto(const SparseChannelEstimate& sparse, MatrixStack& h);

/// Pilot residual power, floored at `floor`.
///
/// An interpolated estimate passes through every LS point, so its residual
/// on the comb is identically zero. The residual is therefore taken against
/// the leave-one-out prediction (mean of the two comb neighbours) at interior
/// comb points: r = Y - 0.5 (H[j-1] + H[j+1]) P. For white noise of variance
/// s2 on a locally linear channel E|r|^2 = 1.5 s2 (|P| = 1), so the mean
/// residual power is divided by 1.5. Returns `floor` when combs are shorter
/// than three points.
double EstimateNoiseVariance(const SymbolView& rx_pilot,
                             const SparseChannelEstimate& ls,
                             const PilotSet& pilots, const FrameConfig& cfg,
                             double floor = 1e-6);

}  // namespace rapro
