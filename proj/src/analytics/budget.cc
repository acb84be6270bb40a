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
#include "rapro/analytics/budget.h"

#include "rapro/common/error.h"

namespace rapro::analytics {

RateReport RateBudget(const FrameConfig& cfg, std::size_t num_ports) {
  if (num_ports == 0) throw ConfigError("num_ports must be >= 1");
  if (!(cfg.frame_duration > 0.0)) throw ConfigError("frame_duration must be > 0");
  RateReport r;
  r.num_ports = num_ports;
  r.bytes_per_frame = cfg.used_subcarriers * cfg.SymbolsPerFrame() * cfg.num_bs_antennas * 4;
  r.megabytes_per_s = static_cast<double>(r.bytes_per_frame) / cfg.frame_duration / 1e6;
  r.per_port_gbps = r.megabytes_per_s * 8.0 / 1000.0 / static_cast<double>(num_ports);
  return r;
}

DutyReport DutyCycle(double cycles, double clock_hz, double frame_duration) {
  if (!(clock_hz > 0.0)) throw ConfigError("clock_hz must be > 0");
  if (!(frame_duration > 0.0)) throw ConfigError("frame_duration must be > 0");
  if (!(cycles >= 0.0)) throw DomainError("cycle count must be >= 0");
  DutyReport d;
  d.time_s = cycles / clock_hz;
  d.duty_fraction = d.time_s / frame_duration;
  return d;
}

nlohmann::json ToJson(const RateReport& r) {
  return {{"bytes_per_frame", r.bytes_per_frame},
          {"megabytes_per_s", r.megabytes_per_s},
          {"num_ports", r.num_ports},
          {"per_port_gbps", r.per_port_gbps}};
}

nlohmann::json ToJson(const DutyReport& r) {
  return {{"time_s", r.time_s}, {"duty_fraction", r.duty_fraction}};
}

}  // namespace rapro::analytics
