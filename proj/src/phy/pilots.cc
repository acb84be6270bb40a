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
#include "rapro/phy/pilots.h"

#include <string>

#include "rapro/common/error.h"
#include "rapro/common/rng.h"
#include "rapro/phy/modulation.h"

namespace rapro {

ResourceGrid GeneratePilotGrid(const FrameConfig& cfg, std::size_t user,
                               std::uint64_t seed) {
  const std::size_t users = cfg.num_users;
  if (users == 0 || cfg.used_subcarriers % users != 0) {
    throw ConfigError("pilot comb needs used_subcarriers divisible by users");
  }
  if (user >= users) {
    throw ConfigError("pilot user " + std::to_string(user) +
                      " out of range for " + std::to_string(users) + " users");
  }
  const std::size_t comb_len = cfg.used_subcarriers / users;
  Rng rng(DeriveSeed(seed, 0x70696c6f74ULL, user));
  const auto symbols = QamModulate(rng.Bits(2 * comb_len), Modulation::kQpsk);

  ResourceGrid grid(1, 1, cfg.used_subcarriers);
  for (std::size_t j = 0; j < comb_len; ++j) {
    grid.at(0, 0, user + j * users) = symbols[j];
  }
  return grid;
}

PilotSet::PilotSet(const FrameConfig& cfg, std::uint64_t seed)
    : seed_(seed), comb_values_(cfg.used_subcarriers) {
  grids_.reserve(cfg.num_users);
  for (std::size_t k = 0; k < cfg.num_users; ++k) {
    grids_.push_back(GeneratePilotGrid(cfg, k, seed));
  }
  for (std::size_t n = 0; n < cfg.used_subcarriers; ++n) {
    comb_values_[n] = grids_[n % cfg.num_users].at(0, 0, n);
  }
}

}  // namespace rapro
