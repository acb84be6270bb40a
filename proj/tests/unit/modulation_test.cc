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
 * @file modulation_test.cc
 * @brief Gray QAM mapping, demapping and the AWGN error-rate check.
 */
#include <gtest/gtest.h>

#include <bitset>
#include <cmath>
#include <limits>
#include <random>

#include "rapro/common/error.h"
#include "rapro/phy/metrics.h"
#include "rapro/phy/modulation.h"
#include "test_util.h"

namespace rapro {
namespace {

constexpr Modulation kAll[] = {Modulation::kQpsk, Modulation::kQam16,
                               Modulation::kQam64, Modulation::kQam256};

std::vector<std::uint8_t> LabelBits(unsigned label, std::size_t bps) {
  std::vector<std::uint8_t> bits(bps);
  for (std::size_t i = 0; i < bps; ++i) bits[i] = (label >> (bps - 1 - i)) & 1U;
  return bits;
}

/// Exhaustive nearest-point search over the table. Only valid away from
/// decision boundaries, where the nearest point is unique.
unsigned BruteForceLabel(cdouble y, Modulation m) {
  const auto& table = Constellation(m);
  unsigned best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (unsigned i = 0; i < table.size(); ++i) {
    const double d = std::norm(y - table[i]);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

TEST(Modulation, QpskExamples) {
  const double r = 1.0 / std::sqrt(2.0);
  const std::uint8_t b00[] = {0, 0};
  const std::uint8_t b11[] = {1, 1};
  const auto s00 = QamModulate(b00, Modulation::kQpsk);
  const auto s11 = QamModulate(b11, Modulation::kQpsk);
  ASSERT_EQ(s00.size(), 1u);
  EXPECT_NEAR(s00[0].real(), r, 1e-15);
  EXPECT_NEAR(s00[0].imag(), r, 1e-15);
  EXPECT_NEAR(s11[0].real(), -r, 1e-15);
  EXPECT_NEAR(s11[0].imag(), -r, 1e-15);
}

TEST(Modulation, Qam16CornerFirst) {
  const std::uint8_t bits[] = {0, 0, 0, 0};
  const auto s = QamModulate(bits, Modulation::kQam16);
  EXPECT_NEAR(s[0].real(), 3.0 / std::sqrt(10.0), 1e-15);
  EXPECT_NEAR(s[0].imag(), 3.0 / std::sqrt(10.0), 1e-15);
}

TEST(Modulation, Qam16TableMatchesDocs) {
  // Per-axis Gray labels 00, 01, 11, 10 sit at +3, +1, -1, -3.
  const int amplitude_of[4] = {3, 1, -3, -1};  // indexed by 2-bit label
  const double scale = 1.0 / std::sqrt(10.0);
  for (unsigned label = 0; label < 16; ++label) {
    const auto s = QamModulate(LabelBits(label, 4), Modulation::kQam16)[0];
    EXPECT_NEAR(s.real(), scale * amplitude_of[label >> 2], 1e-15) << label;
    EXPECT_NEAR(s.imag(), scale * amplitude_of[label & 3], 1e-15) << label;
  }
}

TEST(Modulation, UnitMeanPowerOverFullConstellation) {
  for (Modulation m : kAll) {
    const auto& table = Constellation(m);
    ASSERT_EQ(table.size(), std::size_t{1} << BitsPerSymbol(m));
    double power = 0.0;
    for (const auto& p : table) power += std::norm(p);
    EXPECT_LT(std::abs(power / table.size() - 1.0), 1e-12) << ToString(m);
  }
}

TEST(Modulation, NeighboursDifferInOneBit) {
  for (Modulation m : kAll) {
    const auto& table = Constellation(m);
    const double step = 2.0 * ConstellationScale(m);
    for (unsigned a = 0; a < table.size(); ++a) {
      for (unsigned b = a + 1; b < table.size(); ++b) {
        if (std::abs(std::abs(table[a] - table[b]) - step) < 1e-9) {
          EXPECT_EQ(std::bitset<8>(a ^ b).count(), 1u)
              << ToString(m) << " labels " << a << " " << b;
        }
      }
      for (unsigned b = a + 1; b < table.size(); ++b) {
        EXPECT_GT(std::abs(table[a] - table[b]), 1e-9);
      }
    }
  }
}

TEST(Modulation, RoundTripRandomBlocks) {
  std::mt19937_64 gen(11);
  for (Modulation m : kAll) {
    for (int trial = 0; trial < 20; ++trial) {
      const auto bits = testing::RandomBits(gen, BitsPerSymbol(m) * 257);
      EXPECT_EQ(QamDemodulate(QamModulate(bits, m), m), bits) << ToString(m);
    }
  }
}

TEST(Modulation, RejectsPartialSymbol) {
  const std::vector<std::uint8_t> bits(5);
  EXPECT_THROW(QamModulate(bits, Modulation::kQam16), LengthError);
  EXPECT_THROW(QamModulate(std::vector<std::uint8_t>(3), Modulation::kQpsk),
               LengthError);
  EXPECT_NO_THROW(QamModulate(std::vector<std::uint8_t>{}, Modulation::kQam64));
}

TEST(Modulation, DemodulationMatchesExhaustiveSearch) {
  std::mt19937_64 gen(12);
  std::normal_distribution<double> d(0.0, 0.8);
  for (Modulation m : kAll) {
    for (int i = 0; i < 20000; ++i) {
      const cdouble y{d(gen), d(gen)};
      const auto bits = QamDemodulate(std::span<const cdouble>(&y, 1), m);
      EXPECT_EQ(bits, LabelBits(BruteForceLabel(y, m), BitsPerSymbol(m)))
          << ToString(m) << " y=" << y;
      EXPECT_EQ(NearestPoint(y, m), Constellation(m)[BruteForceLabel(y, m)]);
    }
  }
}

TEST(Modulation, OriginTieGoesToFirstPoint) {
  const cdouble zero{0.0, 0.0};
  const auto bits = QamDemodulate(std::span<const cdouble>(&zero, 1), Modulation::kQpsk);
  EXPECT_EQ(bits, (std::vector<std::uint8_t>{0, 0}));
  EXPECT_EQ(NearestPoint(zero, Modulation::kQpsk), Constellation(Modulation::kQpsk)[0]);
}

TEST(Modulation, BoundaryTiesFavourLargerAmplitude) {
  // On a decision boundary between two levels the more positive amplitude
  // wins on each axis.
  const double s = ConstellationScale(Modulation::kQam16);
  const cdouble y{2.0 * s, -2.0 * s};  // between +3/+1 and between -1/-3
  EXPECT_EQ(NearestPoint(y, Modulation::kQam16), (cdouble{3.0 * s, -1.0 * s}));
}

TEST(Modulation, NonFiniteInputMapsToSomePoint) {
  const cdouble y{std::nan(""), std::numeric_limits<double>::infinity()};
  const auto bits = QamDemodulate(std::span<const cdouble>(&y, 1), Modulation::kQam64);
  EXPECT_EQ(bits.size(), 6u);
}

TEST(Modulation, QpskAwgnAt8dBMatchesQFunction) {
  // Eb/N0 = 8 dB: with Es = 1 and 2 bits per symbol, N0 = 1 / (2 Eb/N0).
  const double ebn0 = std::pow(10.0, 0.8);
  const double n0 = 1.0 / (2.0 * ebn0);
  const std::size_t num_bits = 2'000'000;
  std::mt19937_64 gen(8);
  const auto bits = testing::RandomBits(gen, num_bits);
  auto symbols = QamModulate(bits, Modulation::kQpsk);
  std::normal_distribution<double> noise(0.0, std::sqrt(n0 / 2.0));
  for (auto& s : symbols) s += cdouble{noise(gen), noise(gen)};
  const double ber = ComputeBer(QamDemodulate(symbols, Modulation::kQpsk), bits);
  const double expected = testing::QpskBer(8.0);
  EXPECT_NEAR(expected, 1.91e-4, 0.01e-4);
  EXPECT_NEAR(ber, expected, 0.10 * expected);
}

TEST(Modulation, BerNonIncreasingInSnr) {
  std::mt19937_64 gen(21);
  for (Modulation m : kAll) {
    const std::size_t bps = BitsPerSymbol(m);
    const std::size_t num_bits = 100'000 - 100'000 % bps + bps;
    const auto bits = testing::RandomBits(gen, num_bits);
    const auto clean = QamModulate(bits, m);
    double previous = 1.0;
    for (int snr_db = 0; snr_db <= 20; snr_db += 2) {
      const double n0 = std::pow(10.0, -snr_db / 10.0);
      std::normal_distribution<double> noise(0.0, std::sqrt(n0 / 2.0));
      auto rx = clean;
      for (auto& s : rx) s += cdouble{noise(gen), noise(gen)};
      const double ber = ComputeBer(QamDemodulate(rx, m), bits);
      // A fresh noise draw per point; allow the sampling error of the
      // previous estimate when both are small.
      const double slack = 3.0 * std::sqrt(previous / num_bits);
      EXPECT_LE(ber, previous + slack) << ToString(m) << " at " << snr_db << " dB";
      previous = ber;
    }
  }
}

}  // namespace
}  // namespace rapro
