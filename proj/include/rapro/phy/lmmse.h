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
 * @file lmmse.h
 * @brief Linear MMSE MIMO detection, x = (H^H H + s2 I)^-1 H^H y.
 *
 * The K x K Gram matrix is Cholesky-factored once per subcarrier and reused
 * for every data symbol sharing that channel; no explicit inverse is formed.
 */
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rapro/phy/resource_grid.h"

namespace rapro {

class LmmseFilter {
 public:
  LmmseFilter() = default;

  /// Factor H^H H + noise_var I for a column-major M x K channel `h`.
  /// Throws SingularMatrixError (tagged with `subcarrier`) when the matrix
  /// is not positive definite to working precision.
  void Factor(std::span<const cdouble> h, std::size_t num_antennas,
              std::size_t num_users, double noise_var,
              std::size_t subcarrier = static_cast<std::size_t>(-1));

  /// x = (H^H H + s2 I)^-1 H^H y for the last factored channel.
  /// `y` has M entries, `x` has K entries.
  void Apply(std::span<const cdouble> y, std::span<cdouble> x) const;

  /// Same as Apply but gathers y[m] = rows[m][n] from a symbol view.
  void ApplyColumn(const SymbolView& rx, std::size_t n,
                   std::span<cdouble> x) const;

 private:
  void Solve(std::span<cdouble> x) const;

  std::size_t antennas_ = 0;
  std::size_t users_ = 0;
  std::span<const cdouble> h_;
  std::vector<cdouble> chol_;  // lower-triangular L, row-major K x K
  std::vector<double> inv_diag_;
  mutable std::vector<cdouble> rhs_;
  mutable std::vector<cdouble> y_;
};

/// One-shot detector. `h` is column-major M x K.
std::vector<cdouble> LmmseDetect(std::span<const cdouble> y,
                                 std::span<const cdouble> h,
                                 std::size_t num_antennas,
                                 std::size_t num_users, double noise_var);

}  // namespace rapro
