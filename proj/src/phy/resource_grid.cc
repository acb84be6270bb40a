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
#include "rapro/phy/resource_grid.h"

#include <algorithm>
#include <cmath>

namespace rapro {

namespace {
bool Finite(const cdouble& z) {
  return std::isfinite(z.real()) && std::isfinite(z.imag());
}
}  // namespace

bool ResourceGrid::AllFinite() const {
  return std::all_of(data_.begin(), data_.end(), Finite);
}

bool MatrixStack::AllFinite() const {
  return std::all_of(data_.begin(), data_.end(), Finite);
}

}  // namespace rapro
