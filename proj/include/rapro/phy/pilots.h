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
 * @file pilots.h
 * @brief Frequency-orthogonal pilot combs.
 *
 * User k owns subcarriers {n : n mod K == k} of the pilot symbol and sends
 * unit-magnitude QPSK values drawn from a PRBS seeded by (seed, k).
 */
#pragma once

#include <cstdint>
#include <vector>

#include "rapro/phy/frame_config.h"
#include "rapro/phy/resource_grid.h"

namespace rapro {

/// One pilot symbol for `user`: a 1 x 1 x N_sc grid, zero off the comb.
ResourceGrid GeneratePilotGrid(const FrameConfig& cfg, std::size_t user,
                               std::uint64_t seed);

/// All users' pilot symbols for one configuration, shared by the emulator
/// (transmit side) and the server (LS division).
class PilotSet {
 public:
  PilotSet(const FrameConfig& cfg, std::uint64_t seed);

  std::size_t num_users() const { return grids_.size(); }
  std::uint64_t seed() const { return seed_; }
  const ResourceGrid& grid(std::size_t user) const { return grids_[user]; }
  /// Pilot value of the comb owner of subcarrier n.
  cdouble value(std::size_t n) const { return comb_values_[n]; }
  std::size_t owner(std::size_t n) const { return n % grids_.size(); }

 private:
  std::uint64_t seed_;
  std::vector<ResourceGrid> grids_;
  std::vector<cdouble> comb_values_;
};

}  // namespace rapro
