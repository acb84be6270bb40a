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
#include "rapro/config/system_config.h"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "rapro/common/error.h"
#include "rapro/common/rng.h"

namespace rapro {

using nlohmann::json;

namespace {

template <typename T>
void Read(const json& j, const char* key, T& out) {
  if (!j.contains(key) || j.at(key).is_null()) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

void RequireFixed(const json& j, const char* key, double expected) {
  if (!j.contains(key)) return;
  if (!j.at(key).is_number() || std::abs(j.at(key).get<double>() - expected) > 1e-12) {
    throw ConfigError(std::string("config key '") + key + "' is fixed at " +
                      std::to_string(expected));
  }
}

std::uint64_t Fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

json ToJson(const FrameConfig& cfg) {
  json mods = json::array();
  for (auto m : cfg.modulation) mods.push_back(std::string(ToString(m)));
  return json{{"num_bs_antennas", cfg.num_bs_antennas},
              {"num_users", cfg.num_users},
              {"fft_size", cfg.fft_size},
              {"used_subcarriers", cfg.used_subcarriers},
              {"sample_rate", cfg.sample_rate},
              {"frame_duration", cfg.frame_duration},
              {"num_subframes", cfg.num_subframes},
              {"slots_per_subframe", cfg.slots_per_subframe},
              {"data_symbols_per_slot", cfg.data_symbols_per_slot},
              {"modulation", mods},
              {"cpu_clock_hz", cfg.cpu_clock_hz}};
}

FrameConfig FrameConfigFromJson(const json& j) {
  if (!j.is_object()) throw ConfigError("'frame' must be an object");
  FrameConfig cfg;
  Read(j, "num_bs_antennas", cfg.num_bs_antennas);
  Read(j, "num_users", cfg.num_users);
  Read(j, "fft_size", cfg.fft_size);
  Read(j, "used_subcarriers", cfg.used_subcarriers);
  Read(j, "sample_rate", cfg.sample_rate);
  Read(j, "data_symbols_per_slot", cfg.data_symbols_per_slot);
  Read(j, "cpu_clock_hz", cfg.cpu_clock_hz);
  RequireFixed(j, "frame_duration", 10e-3);
  RequireFixed(j, "num_subframes", 10);
  RequireFixed(j, "slots_per_subframe", 2);
  if (j.contains("modulation")) {
    const json& m = j.at("modulation");
    if (m.is_string()) {
      cfg.modulation.assign(cfg.num_users, ParseModulation(m.get<std::string>()));
    } else if (m.is_array()) {
      cfg.modulation.clear();
      for (const auto& item : m) {
        if (!item.is_string()) throw ConfigError("modulation entries must be strings");
        cfg.modulation.push_back(ParseModulation(item.get<std::string>()));
      }
    } else {
      throw ConfigError("'modulation' must be a string or a list");
    }
  } else {
    cfg.modulation = FrameConfig::MixedModulation(cfg.num_users);
  }
  return cfg;
}

void SystemConfig::Validate() const {
  frame.Validate();
  channel.Validate(frame);
  if (wire.samples_per_packet == 0 ||
      frame.used_subcarriers % wire.samples_per_packet != 0) {
    throw ConfigError("wire.samples_per_packet must divide used_subcarriers");
  }
  if (!(wire.frontend_gain >= 0.0)) throw ConfigError("frontend_gain must be >= 0");
  if (!(receiver.noise_var_min >= 0.0)) throw ConfigError("noise_var_min must be >= 0");
  if (receiver.noise_var_override && !(*receiver.noise_var_override >= 0.0)) {
    throw ConfigError("noise_var_override must be >= 0");
  }
}

void SystemConfig::ReseedRun(std::uint64_t run_seed) {
  seeds.payload = run_seed;
  seeds.channel = DeriveSeed(run_seed, 0x6368);
  seeds.noise = DeriveSeed(run_seed, 0x6e6f);
}

double SystemConfig::EffectiveGain() const {
  if (wire.frontend_gain > 0.0) return wire.frontend_gain;
  return 0.25 / std::sqrt(static_cast<double>(std::max<std::size_t>(frame.num_users, 1)));
}

std::string SystemConfig::LinkFingerprint() const {
  json link = {{"frame", ToJson(frame)},
               {"samples_per_packet", wire.samples_per_packet},
               {"gain", EffectiveGain()},
               {"pilot_seed", seeds.pilot}};
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(Fnv1a(link.dump())));
  return buf;
}

json ToJson(const SystemConfig& cfg) {
  json channel = {{"model", std::string(ToString(cfg.channel.kind))},
                  {"tap_powers", cfg.channel.tap_powers},
                  {"noise_var", cfg.channel.noise_var},
                  {"pilot_noise", cfg.pilot_noise}};
  json receiver = {{"noise_var_min", cfg.receiver.noise_var_min},
                   {"noise_var_override", nullptr}};
  if (cfg.receiver.noise_var_override) {
    receiver["noise_var_override"] = *cfg.receiver.noise_var_override;
  }
  return json{{"config_version", kConfigVersion},
              {"frame", ToJson(cfg.frame)},
              {"channel", channel},
              {"wire",
               {{"samples_per_packet", cfg.wire.samples_per_packet},
                {"frontend_gain", cfg.wire.frontend_gain}}},
              {"seeds",
               {{"pilot", cfg.seeds.pilot},
                {"payload", cfg.seeds.payload},
                {"channel", cfg.seeds.channel},
                {"noise", cfg.seeds.noise}}},
              {"receiver", receiver}};
}

SystemConfig SystemConfigFromJson(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  if (!j.contains("config_version") || !j.at("config_version").is_number_integer() ||
      j.at("config_version").get<int>() != kConfigVersion) {
    throw ConfigError("config_version must be " + std::to_string(kConfigVersion));
  }
  SystemConfig cfg;
  if (j.contains("frame")) cfg.frame = FrameConfigFromJson(j.at("frame"));
  if (j.contains("channel")) {
    const json& c = j.at("channel");
    std::string model = std::string(ToString(cfg.channel.kind));
    Read(c, "model", model);
    cfg.channel.kind = ParseChannelKind(model);
    if (cfg.channel.kind == ChannelKind::kTappedDelayLine) {
      if (c.contains("tap_powers")) {
        Read(c, "tap_powers", cfg.channel.tap_powers);
      } else if (c.contains("num_taps")) {
        std::size_t taps = 0;
        Read(c, "num_taps", taps);
        cfg.channel.tap_powers = ChannelModel::TappedDelayLine(taps).tap_powers;
      }
    } else {
      cfg.channel.tap_powers = {1.0};
    }
    Read(c, "noise_var", cfg.channel.noise_var);
    Read(c, "pilot_noise", cfg.pilot_noise);
  }
  if (j.contains("wire")) {
    Read(j.at("wire"), "samples_per_packet", cfg.wire.samples_per_packet);
    Read(j.at("wire"), "frontend_gain", cfg.wire.frontend_gain);
  }
  if (j.contains("seeds")) {
    const json& s = j.at("seeds");
    Read(s, "pilot", cfg.seeds.pilot);
    Read(s, "payload", cfg.seeds.payload);
    Read(s, "channel", cfg.seeds.channel);
    Read(s, "noise", cfg.seeds.noise);
  }
  if (j.contains("receiver")) {
    const json& r = j.at("receiver");
    Read(r, "noise_var_min", cfg.receiver.noise_var_min);
    if (r.contains("noise_var_override") && !r.at("noise_var_override").is_null()) {
      double v = 0.0;
      Read(r, "noise_var_override", v);
      cfg.receiver.noise_var_override = v;
    }
  }
  cfg.Validate();
  return cfg;
}

SystemConfig LoadSystemConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + path.string() + ": " + e.what());
  }
  return SystemConfigFromJson(j);
}

}  // namespace rapro
