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
#include "rapro/phy/lmmse.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rapro/common/error.h"

namespace rapro {

namespace {

// conj(a) * b without the NaN-recovery path of operator*.
inline cdouble ConjMul(const cdouble& a, const cdouble& b) {
  return {a.real() * b.real() + a.imag() * b.imag(),
          a.real() * b.imag() - a.imag() * b.real()};
}

inline cdouble Mul(const cdouble& a, const cdouble& b) {
  return {a.real() * b.real() - a.imag() * b.imag(),
          a.real() * b.imag() + a.imag() * b.real()};
}

// sum_m conj(a[m]) b[m]. The lane-wise partial sums map onto packed
// multiplies of (re, im) pairs, which a reduction over interleaved complex
// values does not on baseline x86-64.
inline cdouble ConjDot(const cdouble* a, const cdouble* b, std::size_t n) {
  const double* x = reinterpret_cast<const double*>(a);
  const double* y = reinterpret_cast<const double*>(b);
  double same[2] = {0.0, 0.0};
  double cross[2] = {0.0, 0.0};
  for (std::size_t m = 0; m < 2 * n; m += 2) {
    same[0] += x[m] * y[m];
    same[1] += x[m + 1] * y[m + 1];
    cross[0] += x[m] * y[m + 1];
    cross[1] += x[m + 1] * y[m];
  }
  return {same[0] + same[1], cross[0] - cross[1]};
}

}  // namespace

void LmmseFilter::Factor(std::span<const cdouble> h, std::size_t num_antennas,
                         std::size_t num_users, double noise_var,
                         std::size_t subcarrier) {
  const std::size_t M = num_antennas;
  const std::size_t K = num_users;
  if (h.size() != M * K || K == 0) {
    throw LengthError("channel matrix has " + std::to_string(h.size()) +
                      " entries, expected " + std::to_string(M * K));
  }
  if (!(noise_var >= 0.0)) {
    throw DomainError("noise variance must be >= 0");
  }
  antennas_ = M;
  users_ = K;
  h_ = h;
  chol_.assign(K * K, cdouble{});
  inv_diag_.assign(K, 0.0);
  rhs_.resize(K);

  // Lower triangle of G = H^H H + s2 I, stored in chol_ and factored in place.
  double max_diag = 0.0;
  for (std::size_t i = 0; i < K; ++i) {
    const cdouble* hi = h.data() + i * M;
    for (std::size_t j = 0; j <= i; ++j) {
      chol_[i * K + j] = ConjDot(hi, h.data() + j * M, M);
    }
    chol_[i * K + i] += noise_var;
    max_diag = std::max(max_diag, chol_[i * K + i].real());
  }

  const double tol =
      64.0 * std::numeric_limits<double>::epsilon() * std::max(max_diag, 0.0);
  for (std::size_t j = 0; j < K; ++j) {
    double d = chol_[j * K + j].real();
    for (std::size_t p = 0; p < j; ++p) d -= std::norm(chol_[j * K + p]);
    if (!(d > tol) || !std::isfinite(d)) {
      throw SingularMatrixError(
          subcarrier,
          "H^H H + s2 I is singular to working precision" +
              (subcarrier == SingularMatrixError::npos
                   ? std::string()
                   : " at subcarrier " + std::to_string(subcarrier)));
    }
    const double ljj = std::sqrt(d);
    chol_[j * K + j] = ljj;
    inv_diag_[j] = 1.0 / ljj;
    for (std::size_t i = j + 1; i < K; ++i) {
      cdouble s = chol_[i * K + j];
      for (std::size_t p = 0; p < j; ++p) {
        s -= Mul(chol_[i * K + p], std::conj(chol_[j * K + p]));
      }
      chol_[i * K + j] = s * inv_diag_[j];
    }
  }
}

void LmmseFilter::Solve(std::span<cdouble> x) const {
  const std::size_t K = users_;
  // L z = rhs
  for (std::size_t i = 0; i < K; ++i) {
    cdouble s = rhs_[i];
    for (std::size_t p = 0; p < i; ++p) s -= Mul(chol_[i * K + p], rhs_[p]);
    rhs_[i] = s * inv_diag_[i];
  }
  // L^H x = z
  for (std::size_t ii = K; ii-- > 0;) {
    cdouble s = rhs_[ii];
    for (std::size_t p = ii + 1; p < K; ++p) {
      s -= ConjMul(chol_[p * K + ii], x[p]);
    }
    x[ii] = s * inv_diag_[ii];
  }
}

void LmmseFilter::Apply(std::span<const cdouble> y, std::span<cdouble> x) const {
  if (y.size() != antennas_ || x.size() != users_) {
    throw LengthError("LMMSE apply: dimension mismatch");
  }
  for (std::size_t k = 0; k < users_; ++k) {
    rhs_[k] = ConjDot(h_.data() + k * antennas_, y.data(), antennas_);
  }
  Solve(x);
}

void LmmseFilter::ApplyColumn(const SymbolView& rx, std::size_t n,
                              std::span<cdouble> x) const {
  // Gather the column once so the K dot products run over contiguous data.
  y_.resize(antennas_);
  for (std::size_t m = 0; m < antennas_; ++m) y_[m] = rx.rows[m][n];
  for (std::size_t k = 0; k < users_; ++k) {
    rhs_[k] = ConjDot(h_.data() + k * antennas_, y_.data(), antennas_);
  }
  Solve(x);
}

std::vector<cdouble> LmmseDetect(std::span<const cdouble> y,
                                 std::span<const cdouble> h,
                                 std::size_t num_antennas,
                                 std::size_t num_users, double noise_var) {
  LmmseFilter filter;
  filter.Factor(h, num_antennas, num_users, noise_var);
  std::vector<cdouble> x(num_users);
  filter.Apply(y, x);
  return x;
}

}  // namespace rapro
