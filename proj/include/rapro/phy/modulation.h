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
 * @file modulation.h
 * @brief Gray-mapped square QAM with unit average power.
 *
 * Bit layout per symbol: the first half of the bits select the in-phase
 * level, the second half the quadrature level, MSB first. On each axis the
 * Gray label g selects amplitude (L - 1 - 2 * GrayDecode(g)), so the all-zero
 * label sits on the (+, +) corner. The full table is in docs/modulation.md.
 */
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rapro/phy/frame_config.h"
#include "rapro/phy/resource_grid.h"

namespace rapro {

/// 1 / sqrt(mean |s|^2) of the unnormalized odd-integer constellation.
double ConstellationScale(Modulation m);

/// All 2^bps points indexed by their bit label.
const std::vector<cdouble>& Constellation(Modulation m);

/// `bits` holds one bit per byte (0/1). Throws LengthError unless the length
/// is a multiple of BitsPerSymbol(m).
std::vector<cdouble> QamModulate(std::span<const std::uint8_t> bits,
                                 Modulation m);

/// Minimum-distance hard decision. Ties resolve toward the level with the
/// larger amplitude on each axis, i.e. the lowest-index constellation point
/// in corner-first order (the origin maps to label 0 for QPSK).
std::vector<std::uint8_t> QamDemodulate(std::span<const cdouble> symbols,
                                        Modulation m);

/// Allocation-free variant; `out` must hold symbols.size() * bps entries.
void QamDemodulateInto(std::span<const cdouble> symbols, Modulation m,
                       std::span<std::uint8_t> out);

/// Nearest constellation point to each symbol (decision-directed reference).
cdouble NearestPoint(cdouble symbol, Modulation m);

}  // namespace rapro
