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
 * @file stats.h
 * @brief Small descriptive statistics helpers shared by the reports.
 */
#pragma once

#include <vector>

#include "json.hpp"

namespace rapro {

/// Linear-interpolated percentile, p in [0, 100]. Empty input yields 0.
double Percentile(std::vector<double> values, double p);

struct Summary {
  std::size_t count = 0;
  double mean = 0.0;
  double p50 = 0.0;
  double p90 = 0.0;
  double p99 = 0.0;
  double max = 0.0;

  static Summary Of(const std::vector<double>& values);
};

nlohmann::json ToJson(const Summary& s);
Summary SummaryFromJson(const nlohmann::json& j);

}  // namespace rapro
