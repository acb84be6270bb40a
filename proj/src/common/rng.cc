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
#include "rapro/common/rng.h"

#include <cmath>
#include <numbers>

namespace rapro {

double Rng::Gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // 1 - U keeps the log argument in (0, 1].
  const double u1 = 1.0 - Uniform();
  const double u2 = Uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

std::complex<double> Rng::ComplexGaussian(double variance) {
  const double s = std::sqrt(variance / 2.0);
  const double re = Gaussian();
  const double im = Gaussian();
  return {s * re, s * im};
}

std::vector<std::uint8_t> Rng::Bits(std::size_t count) {
  std::vector<std::uint8_t> bits(count);
  std::size_t i = 0;
  while (i < count) {
    std::uint64_t word = engine_();
    for (int b = 0; b < 64 && i < count; ++b, ++i) {
      bits[i] = static_cast<std::uint8_t>((word >> 63) & 1U);
      word <<= 1;
    }
  }
  return bits;
}

}  // namespace rapro
