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
#include "rapro/wire/q15.h"

#include <cmath>
#include <string>

#include "rapro/common/error.h"

namespace rapro::wire {

std::int16_t ToQ15(double x) {
  if (std::isnan(x)) return 0;
  const double scaled = std::round(x * kQ15Scale);
  if (scaled >= 32767.0) return 32767;
  if (scaled <= -32768.0) return -32768;
  return static_cast<std::int16_t>(scaled);
}

void QuantizeQ15(cdouble x, std::span<std::uint8_t, 4> out) {
  const auto re = static_cast<std::uint16_t>(ToQ15(x.real()));
  const auto im = static_cast<std::uint16_t>(ToQ15(x.imag()));
  out[0] = static_cast<std::uint8_t>(re & 0xFF);
  out[1] = static_cast<std::uint8_t>(re >> 8);
  out[2] = static_cast<std::uint8_t>(im & 0xFF);
  out[3] = static_cast<std::uint8_t>(im >> 8);
}

std::array<std::uint8_t, 4> QuantizeQ15(cdouble x) {
  std::array<std::uint8_t, 4> out{};
  QuantizeQ15(x, std::span<std::uint8_t, 4>(out));
  return out;
}

cdouble DequantizeQ15(std::span<const std::uint8_t> bytes) {
  if (bytes.size() != kBytesPerSample) {
    throw LengthError("Q1.15 sample needs 4 bytes, got " +
                      std::to_string(bytes.size()));
  }
  const auto re = static_cast<std::int16_t>(bytes[0] | (bytes[1] << 8));
  const auto im = static_cast<std::int16_t>(bytes[2] | (bytes[3] << 8));
  return {FromQ15(re), FromQ15(im)};
}

}  // namespace rapro::wire
