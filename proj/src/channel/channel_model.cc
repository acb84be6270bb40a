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
#include "rapro/channel/channel_model.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "rapro/common/error.h"
#include "rapro/common/rng.h"

namespace rapro {

std::string_view ToString(ChannelKind kind) {
  switch (kind) {
    case ChannelKind::kIdentity:
      return "identity";
    case ChannelKind::kFlatRayleigh:
      return "flat_rayleigh";
    case ChannelKind::kTappedDelayLine:
      return "tdl";
  }
  return "?";
}

ChannelKind ParseChannelKind(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (s == "identity") return ChannelKind::kIdentity;
  if (s == "flat_rayleigh" || s == "rayleigh") return ChannelKind::kFlatRayleigh;
  if (s == "tdl" || s == "tapped_delay_line") return ChannelKind::kTappedDelayLine;
  throw ConfigError("unknown channel model '" + std::string(name) + "'");
}

void ChannelModel::Validate(const FrameConfig& cfg) const {
  if (!(noise_var >= 0.0) || !std::isfinite(noise_var)) {
    throw ConfigError("channel noise_var must be finite and >= 0");
  }
  switch (kind) {
    case ChannelKind::kIdentity:
      if (cfg.num_bs_antennas != cfg.num_users) {
        throw ConfigError("identity channel requires num_bs_antennas == "
                          "num_users (got " +
                          std::to_string(cfg.num_bs_antennas) + " and " +
                          std::to_string(cfg.num_users) + ")");
      }
      break;
    case ChannelKind::kFlatRayleigh:
      break;
    case ChannelKind::kTappedDelayLine: {
      if (tap_powers.empty()) throw ConfigError("TDL needs at least one tap");
      for (double p : tap_powers) {
        if (!(p >= 0.0)) throw ConfigError("TDL tap powers must be >= 0");
      }
      const double sum = std::accumulate(tap_powers.begin(), tap_powers.end(), 0.0);
      if (std::abs(sum - 1.0) > 1e-9) {
        throw ConfigError("TDL tap powers must sum to 1 (got " +
                          std::to_string(sum) + ")");
      }
      break;
    }
  }
}

ChannelModel ChannelModel::Identity(double noise_var) {
  ChannelModel m;
  m.kind = ChannelKind::kIdentity;
  m.tap_powers = {1.0};
  m.noise_var = noise_var;
  return m;
}

ChannelModel ChannelModel::FlatRayleigh(double noise_var) {
  ChannelModel m;
  m.kind = ChannelKind::kFlatRayleigh;
  m.tap_powers = {1.0};
  m.noise_var = noise_var;
  return m;
}

ChannelModel ChannelModel::TappedDelayLine(std::size_t num_taps,
                                           double noise_var) {
  ChannelModel m;
  m.kind = ChannelKind::kTappedDelayLine;
  m.tap_powers.assign(num_taps, num_taps ? 1.0 / num_taps : 0.0);
  m.noise_var = noise_var;
  return m;
}

namespace {

ChannelRealization Generate(const ChannelModel& model, const FrameConfig& cfg,
                            std::uint64_t seed, std::size_t num_subcarriers) {
  model.Validate(cfg);
  const std::size_t M = cfg.num_bs_antennas;
  const std::size_t K = cfg.num_users;
  ChannelRealization r;
  r.kind = model.kind;
  r.seed = seed;
  r.h = MatrixStack(num_subcarriers, M, K);
  Rng rng(DeriveSeed(seed, 0x6368616eULL));

  switch (model.kind) {
    case ChannelKind::kIdentity:
      for (std::size_t n = 0; n < num_subcarriers; ++n) {
        for (std::size_t k = 0; k < K; ++k) r.h.at(n, k, k) = 1.0;
      }
      break;
    case ChannelKind::kFlatRayleigh: {
      std::vector<cdouble> draw(M * K);
      for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t m = 0; m < M; ++m) draw[k * M + m] = rng.ComplexGaussian(1.0);
      }
      for (std::size_t n = 0; n < num_subcarriers; ++n) {
        std::copy(draw.begin(), draw.end(), r.h.matrix(n).begin());
      }
      break;
    }
    case ChannelKind::kTappedDelayLine: {
      const std::size_t L = model.num_taps();
      r.num_taps = L;
      r.taps.resize(M * K * L);
      for (std::size_t m = 0; m < M; ++m) {
        for (std::size_t k = 0; k < K; ++k) {
          for (std::size_t l = 0; l < L; ++l) {
            r.taps[(m * K + k) * L + l] = rng.ComplexGaussian(model.tap_powers[l]);
          }
        }
      }
      // Phase ramp per tap: exp(-j 2 pi n l / fft_size).
      std::vector<cdouble> ramp(L);
      for (std::size_t n = 0; n < num_subcarriers; ++n) {
        for (std::size_t l = 0; l < L; ++l) {
          const double phase = -2.0 * std::numbers::pi *
                               static_cast<double>((n * l) % cfg.fft_size) /
                               static_cast<double>(cfg.fft_size);
          ramp[l] = {std::cos(phase), std::sin(phase)};
        }
        for (std::size_t m = 0; m < M; ++m) {
          for (std::size_t k = 0; k < K; ++k) {
            const cdouble* g = r.taps.data() + (m * K + k) * L;
            cdouble acc{};
            for (std::size_t l = 0; l < L; ++l) acc += g[l] * ramp[l];
            r.h.at(n, m, k) = acc;
          }
        }
      }
      break;
    }
  }
  return r;
}

}  // namespace

ChannelRealization GenerateChannel(const ChannelModel& model,
                                   const FrameConfig& cfg, std::uint64_t seed) {
  return Generate(model, cfg, seed, cfg.used_subcarriers);
}

ChannelRealization GenerateChannelFullGrid(const ChannelModel& model,
                                           const FrameConfig& cfg,
                                           std::uint64_t seed) {
  return Generate(model, cfg, seed, cfg.fft_size);
}

ResourceGrid ApplyChannel(std::span<const ResourceGrid> tx_per_user,
                          const ChannelRealization& channel, double noise_var,
                          std::uint64_t noise_seed, std::size_t first_symbol,
                          std::size_t num_symbols) {
  const std::size_t M = channel.h.rows();
  const std::size_t K = channel.h.cols();
  const std::size_t N = channel.h.count();
  if (tx_per_user.size() != K) {
    throw LengthError("got " + std::to_string(tx_per_user.size()) +
                      " user grids for a channel with " + std::to_string(K) +
                      " users");
  }
  for (const auto& g : tx_per_user) {
    if (g.num_streams() != 1 || g.num_subcarriers() != N ||
        g.num_symbols() < first_symbol + num_symbols) {
      throw LengthError("user grid dimensions do not match the channel");
    }
  }
  if (!(noise_var >= 0.0)) throw DomainError("noise_var must be >= 0");

  ResourceGrid out(M, num_symbols, N);
  for (std::size_t s = 0; s < num_symbols; ++s) {
    for (std::size_t n = 0; n < N; ++n) {
      const auto h = channel.h.matrix(n);
      for (std::size_t k = 0; k < K; ++k) {
        const cdouble x = tx_per_user[k].at(0, first_symbol + s, n);
        if (x == cdouble{}) continue;
        const cdouble* hk = h.data() + k * M;
        for (std::size_t m = 0; m < M; ++m) {
          cdouble& y = out.at(m, s, n);
          y = {y.real() + hk[m].real() * x.real() - hk[m].imag() * x.imag(),
               y.imag() + hk[m].real() * x.imag() + hk[m].imag() * x.real()};
        }
      }
    }
  }
  if (noise_var > 0.0) {
    Rng rng(DeriveSeed(noise_seed, 0x6e6f697365ULL));
    for (auto& y : out.data()) y += rng.ComplexGaussian(noise_var);
  }
  return out;
}

ResourceGrid ApplyChannel(std::span<const ResourceGrid> tx_per_user,
                          const ChannelRealization& channel, double noise_var,
                          std::uint64_t noise_seed) {
  const std::size_t S = tx_per_user.empty() ? 0 : tx_per_user[0].num_symbols();
  return ApplyChannel(tx_per_user, channel, noise_var, noise_seed, 0, S);
}

}  // namespace rapro
