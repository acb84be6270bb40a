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
 * @file metrics.h
 * @brief Link-quality metrics.
 */
#pragma once

#include <cstdint>
#include <span>

#include "rapro/phy/resource_grid.h"

namespace rapro {

/// 100 * sqrt(sum |est - ref|^2 / sum |ref|^2). Throws LengthError on size
/// mismatch or empty input and DomainError on an all-zero reference.
double ComputeEvm(std::span<const cdouble> est, std::span<const cdouble> ref);

/// Hamming distance / length over 0/1-valued bytes.
double ComputeBer(std::span<const std::uint8_t> bits,
                  std::span<const std::uint8_t> ref_bits);

std::size_t CountBitErrors(std::span<const std::uint8_t> bits,
                           std::span<const std::uint8_t> ref_bits);

/// Running sums behind ComputeEvm, for aggregating over many blocks.
struct EvmAccumulator {
  double error_power = 0.0;
  double reference_power = 0.0;

  void Add(std::span<const cdouble> est, std::span<const cdouble> ref);
  /// Percent; 0 when nothing has been accumulated.
  double Percent() const;
};

}  // namespace rapro
