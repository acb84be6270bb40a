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
#include "rapro/phy/metrics.h"

#include <cmath>
#include <string>

#include "rapro/common/error.h"

namespace rapro {

void EvmAccumulator::Add(std::span<const cdouble> est,
                         std::span<const cdouble> ref) {
  if (est.size() != ref.size()) {
    throw LengthError("EVM inputs differ in length (" +
                      std::to_string(est.size()) + " vs " +
                      std::to_string(ref.size()) + ")");
  }
  for (std::size_t i = 0; i < est.size(); ++i) {
    error_power += std::norm(est[i] - ref[i]);
    reference_power += std::norm(ref[i]);
  }
}

double EvmAccumulator::Percent() const {
  if (reference_power <= 0.0) return 0.0;
  return 100.0 * std::sqrt(error_power / reference_power);
}

double ComputeEvm(std::span<const cdouble> est, std::span<const cdouble> ref) {
  if (ref.empty()) throw LengthError("EVM needs at least one symbol");
  EvmAccumulator acc;
  acc.Add(est, ref);
  if (acc.reference_power <= 0.0) {
    throw DomainError("EVM reference is all zero");
  }
  return acc.Percent();
}

std::size_t CountBitErrors(std::span<const std::uint8_t> bits,
                           std::span<const std::uint8_t> ref_bits) {
  if (bits.size() != ref_bits.size()) {
    throw LengthError("BER inputs differ in length (" +
                      std::to_string(bits.size()) + " vs " +
                      std::to_string(ref_bits.size()) + ")");
  }
  std::size_t errors = 0;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    errors += ((bits[i] ^ ref_bits[i]) & 1U);
  }
  return errors;
}

double ComputeBer(std::span<const std::uint8_t> bits,
                  std::span<const std::uint8_t> ref_bits) {
  const std::size_t errors = CountBitErrors(bits, ref_bits);
  if (bits.empty()) throw LengthError("BER needs at least one bit");
  return static_cast<double>(errors) / static_cast<double>(bits.size());
}

}  // namespace rapro
