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
 * @file q15.h
 * @brief Q1.15 sample quantization (signed 16-bit, 15 fractional bits).
 */
#pragma once

#include <array>
#include <cstdint>
#include <span>

#include "rapro/phy/resource_grid.h"

namespace rapro::wire {

constexpr double kQ15Scale = 32768.0;
constexpr std::size_t kBytesPerSample = 4;

/// Saturate to [-1, 1 - 2^-15], then round half away from zero.
std::int16_t ToQ15(double x);
constexpr double FromQ15(std::int16_t v) { return v / kQ15Scale; }

/// Real then imaginary part, each little-endian int16.
void QuantizeQ15(cdouble x, std::span<std::uint8_t, 4> out);
std::array<std::uint8_t, 4> QuantizeQ15(cdouble x);

/// Throws LengthError unless `bytes` holds exactly 4 bytes.
cdouble DequantizeQ15(std::span<const std::uint8_t> bytes);

}  // namespace rapro::wire
