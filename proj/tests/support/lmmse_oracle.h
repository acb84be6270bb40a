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
 * @file lmmse_oracle.h
 * @brief Extended-precision explicit-inverse reference for the LMMSE solve.
 */
#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "rapro/phy/resource_grid.h"

namespace rapro::testing {

using cld = std::complex<long double>;

/// x = inv(H^H H + s2 I) H^H y with the inverse formed by Gauss-Jordan
/// elimination in long double. `h` is column-major M x K.
inline std::vector<cld> ExplicitInverseOracle(const std::vector<cdouble>& y,
                                       const std::vector<cdouble>& h, std::size_t M,
                                       std::size_t K, double s2) {
  auto H = [&](std::size_t m, std::size_t k) { return cld(h[k * M + m]); };
  std::vector<cld> a(K * 2 * K);  // [G | I], row-major
  for (std::size_t r = 0; r < K; ++r) {
    for (std::size_t c = 0; c < K; ++c) {
      cld g = 0;
      for (std::size_t m = 0; m < M; ++m) g += std::conj(H(m, r)) * H(m, c);
      if (r == c) g += static_cast<long double>(s2);
      a[r * 2 * K + c] = g;
    }
    a[r * 2 * K + K + r] = 1;
  }
  for (std::size_t col = 0; col < K; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < K; ++r) {
      if (std::abs(a[r * 2 * K + col]) > std::abs(a[pivot * 2 * K + col])) pivot = r;
    }
    for (std::size_t c = 0; c < 2 * K; ++c) std::swap(a[col * 2 * K + c], a[pivot * 2 * K + c]);
    const cld inv = cld(1) / a[col * 2 * K + col];
    for (std::size_t c = 0; c < 2 * K; ++c) a[col * 2 * K + c] *= inv;
    for (std::size_t r = 0; r < K; ++r) {
      if (r == col) continue;
      const cld f = a[r * 2 * K + col];
      for (std::size_t c = 0; c < 2 * K; ++c) a[r * 2 * K + c] -= f * a[col * 2 * K + c];
    }
  }
  std::vector<cld> hy(K);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t m = 0; m < M; ++m) hy[k] += std::conj(H(m, k)) * cld(y[m]);
  }
  std::vector<cld> x(K);
  for (std::size_t r = 0; r < K; ++r) {
    for (std::size_t c = 0; c < K; ++c) x[r] += a[r * 2 * K + K + c] * hy[c];
  }
  return x;
}

inline double RelativeError(const std::vector<cdouble>& x, const std::vector<cld>& ref) {
  long double num = 0, den = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num += std::norm(cld(x[i]) - ref[i]);
    den += std::norm(ref[i]);
  }
  return static_cast<double>(std::sqrt(num / den));
}

}  // namespace rapro::testing
