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
 * @file budget.h
 * @brief Fronthaul rate and CPU duty-cycle arithmetic.
 */
#pragma once

#include <cstddef>

#include "json.hpp"
#include "rapro/phy/frame_config.h"

namespace rapro::analytics {

/// Bytes of Q1.15 I/Q the antennas produce per frame, excluding headers.
struct RateReport {
  std::size_t bytes_per_frame = 0;
  double megabytes_per_s = 0.0;
  std::size_t num_ports = 1;
  double per_port_gbps = 0.0;
};

/// bytes_per_frame = N_sc * symbols per frame * M * 4. Throws ConfigError for
/// zero ports or a non-positive frame duration.
RateReport RateBudget(const FrameConfig& cfg, std::size_t num_ports = 1);

struct DutyReport {
  double time_s = 0.0;
  double duty_fraction = 0.0;
};

/// time = cycles / clock_hz, duty = time / frame_duration. Throws
/// ConfigError unless clock_hz and frame_duration are positive.
DutyReport DutyCycle(double cycles, double clock_hz, double frame_duration);

nlohmann::json ToJson(const RateReport& r);
nlohmann::json ToJson(const DutyReport& r);

}  // namespace rapro::analytics
