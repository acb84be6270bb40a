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
 * @file rng.h
 * @brief Seeded random streams with implementation-independent output.
 *
 * The standard <random> distributions are not specified bit-exactly, so the
 * generators below only consume raw std::mt19937_64 words (which are).
 */
#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <vector>

namespace rapro {

/// SplitMix64 finalizer, used to derive independent sub-seeds.
constexpr std::uint64_t MixSeed(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t DeriveSeed(std::uint64_t base, std::uint64_t a,
                                   std::uint64_t b = 0, std::uint64_t c = 0) {
  return MixSeed(MixSeed(MixSeed(MixSeed(base) ^ a) ^ b) ^ c);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(MixSeed(seed)) {}

  std::uint64_t NextU64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double Uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; the spare value is cached.
  double Gaussian();

  /// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
  std::complex<double> ComplexGaussian(double variance);

  /// `count` PRBS bits, one per byte (values 0/1).
  std::vector<std::uint8_t> Bits(std::size_t count);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace rapro
