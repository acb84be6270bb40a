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
#include "rapro/phy/modulation.h"

#include <array>
#include <cmath>
#include <string>

#include "rapro/common/error.h"

namespace rapro {

namespace {

int AxisBits(Modulation m) { return static_cast<int>(BitsPerSymbol(m)) / 2; }

unsigned GrayDecode(unsigned g) {
  unsigned b = g;
  for (unsigned shift = 1; shift < 8; shift <<= 1) b ^= b >> shift;
  return b;
}

unsigned GrayEncode(unsigned i) { return i ^ (i >> 1); }

/// Level index i in [0, L) -> integer amplitude L - 1 - 2i.
int Amplitude(unsigned level, int levels) {
  return levels - 1 - 2 * static_cast<int>(level);
}

/// Nearest level index for a scaled axis value. Ties go to the lower index,
/// i.e. the index is ceil(pos - 0.5) clamped to [0, levels - 1]. The ceil is
/// done by truncation because the value is known to be positive there.
unsigned SliceAxis(double value, double inv_scale, int levels) {
  const double v = (static_cast<double>(levels - 1) - value * inv_scale) / 2.0 - 0.5;
  if (!(v > 0.0)) return 0;  // also maps NaN to the first level
  if (v >= static_cast<double>(levels - 1)) return static_cast<unsigned>(levels - 1);
  const auto t = static_cast<unsigned>(v);
  return static_cast<double>(t) < v ? t + 1 : t;
}

std::vector<cdouble> BuildTable(Modulation m) {
  const int b = AxisBits(m);
  const int levels = 1 << b;
  const double scale = ConstellationScale(m);
  std::vector<cdouble> table(static_cast<std::size_t>(levels) * levels);
  for (unsigned gi = 0; gi < static_cast<unsigned>(levels); ++gi) {
    for (unsigned gq = 0; gq < static_cast<unsigned>(levels); ++gq) {
      const unsigned label = (gi << b) | gq;
      table[label] = {scale * Amplitude(GrayDecode(gi), levels),
                      scale * Amplitude(GrayDecode(gq), levels)};
    }
  }
  return table;
}

std::size_t TableIndex(Modulation m) {
  switch (m) {
    case Modulation::kQpsk:
      return 0;
    case Modulation::kQam16:
      return 1;
    case Modulation::kQam64:
      return 2;
    case Modulation::kQam256:
      return 3;
  }
  throw ConfigError("invalid modulation");
}

}  // namespace

double ConstellationScale(Modulation m) {
  // Mean power of the odd-integer square grid is 2 (L^2 - 1) / 3.
  const double levels = static_cast<double>(1 << AxisBits(m));
  return 1.0 / std::sqrt(2.0 * (levels * levels - 1.0) / 3.0);
}

const std::vector<cdouble>& Constellation(Modulation m) {
  static const std::array<std::vector<cdouble>, 4> kTables = {
      BuildTable(Modulation::kQpsk), BuildTable(Modulation::kQam16),
      BuildTable(Modulation::kQam64), BuildTable(Modulation::kQam256)};
  return kTables[TableIndex(m)];
}

std::vector<cdouble> QamModulate(std::span<const std::uint8_t> bits,
                                 Modulation m) {
  const std::size_t bps = BitsPerSymbol(m);
  if (bits.size() % bps != 0) {
    throw LengthError("bit count " + std::to_string(bits.size()) +
                      " is not a multiple of " + std::to_string(bps) +
                      " bits per " + std::string(ToString(m)) + " symbol");
  }
  const auto& table = Constellation(m);
  std::vector<cdouble> out(bits.size() / bps);
  for (std::size_t s = 0; s < out.size(); ++s) {
    unsigned label = 0;
    for (std::size_t i = 0; i < bps; ++i) {
      label = (label << 1) | (bits[s * bps + i] & 1U);
    }
    out[s] = table[label];
  }
  return out;
}

void QamDemodulateInto(std::span<const cdouble> symbols, Modulation m,
                       std::span<std::uint8_t> out) {
  const int b = AxisBits(m);
  const int levels = 1 << b;
  const double inv_scale = 1.0 / ConstellationScale(m);
  const std::size_t bps = BitsPerSymbol(m);
  if (out.size() != symbols.size() * bps) {
    throw LengthError("demodulation output has wrong size");
  }
  for (std::size_t s = 0; s < symbols.size(); ++s) {
    const unsigned gi = GrayEncode(SliceAxis(symbols[s].real(), inv_scale, levels));
    const unsigned gq = GrayEncode(SliceAxis(symbols[s].imag(), inv_scale, levels));
    std::uint8_t* dst = out.data() + s * bps;
    for (int i = 0; i < b; ++i) {
      dst[i] = static_cast<std::uint8_t>((gi >> (b - 1 - i)) & 1U);
      dst[b + i] = static_cast<std::uint8_t>((gq >> (b - 1 - i)) & 1U);
    }
  }
}

std::vector<std::uint8_t> QamDemodulate(std::span<const cdouble> symbols,
                                        Modulation m) {
  std::vector<std::uint8_t> bits(symbols.size() * BitsPerSymbol(m));
  QamDemodulateInto(symbols, m, bits);
  return bits;
}

cdouble NearestPoint(cdouble symbol, Modulation m) {
  const int b = AxisBits(m);
  const int levels = 1 << b;
  static const std::array<double, 4> kScales = {
      ConstellationScale(Modulation::kQpsk), ConstellationScale(Modulation::kQam16),
      ConstellationScale(Modulation::kQam64), ConstellationScale(Modulation::kQam256)};
  const double scale = kScales[TableIndex(m)];
  const unsigned li = SliceAxis(symbol.real(), 1.0 / scale, levels);
  const unsigned lq = SliceAxis(symbol.imag(), 1.0 / scale, levels);
  return {scale * Amplitude(li, levels), scale * Amplitude(lq, levels)};
}

}  // namespace rapro
