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
#include "rapro/analytics/score.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <tuple>

#include "rapro/common/error.h"
#include "rapro/frontend/uplink.h"
#include "rapro/phy/metrics.h"
#include "rapro/phy/modulation.h"

namespace rapro::analytics {
namespace {

using wire::ResultRecord;
using wire::SubframeKey;

auto RecordOrder(const ResultRecord& r) {
  return std::make_tuple(r.frame_seq, r.subframe_idx, r.slot_idx, r.symbol_idx, r.user);
}

std::vector<SubframeKey> Keys(const nlohmann::json& list) {
  std::vector<SubframeKey> out;
  for (const auto& e : list) {
    out.push_back({e.at("frame_seq").get<std::uint32_t>(),
                   e.at("subframe_idx").get<std::uint8_t>()});
  }
  return out;
}

nlohmann::json KeysJson(const std::vector<SubframeKey>& keys) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& k : keys) {
    out.push_back({{"frame_seq", k.frame_seq}, {"subframe_idx", k.subframe_idx}});
  }
  return out;
}

void CheckProvenance(const nlohmann::json& server, const frontend::StreamReport& stream) {
  const SystemConfig& cfg = stream.truth.config;
  const std::string fp = server.at("link_fingerprint").get<std::string>();
  if (fp != stream.truth.link_fingerprint || fp != cfg.LinkFingerprint()) {
    throw ProvenanceError("link fingerprint mismatch: server " + fp + ", stream " +
                          stream.truth.link_fingerprint);
  }
  const auto& seeds = server.at("seeds");
  const bool same = seeds.at("pilot").get<std::uint64_t>() == cfg.seeds.pilot &&
                    seeds.at("payload").get<std::uint64_t>() == cfg.seeds.payload &&
                    seeds.at("channel").get<std::uint64_t>() == cfg.seeds.channel &&
                    seeds.at("noise").get<std::uint64_t>() == cfg.seeds.noise;
  if (!same) throw ProvenanceError("server and stream were run with different seeds");
}

}  // namespace

std::vector<ResultRecord> LoadCapture(const std::filesystem::path& path) {
  std::vector<ResultRecord> out;
  for (const auto& dg : wire::ReadCapture(path)) out.push_back(wire::DecodeResult(dg));
  return out;
}

ScoreReport ScoreRecords(const nlohmann::json& server, const frontend::StreamReport& stream,
                         const std::vector<ResultRecord>* records) {
  ScoreReport rep;
  try {
    CheckProvenance(server, stream);
    const FrameConfig& cfg = stream.truth.config.frame;
    const std::uint32_t first = stream.truth.first_frame_seq;
    const std::uint64_t end = std::uint64_t{first} + stream.truth.num_frames;

    std::set<std::uint32_t> seen;
    for (const auto& f : server.at("frame_records")) {
      const auto seq = f.at("frame_seq").get<std::uint32_t>();
      if (seq < first || seq >= end) {
        throw ProvenanceError("server processed frame " + std::to_string(seq) +
                              " outside the streamed range");
      }
      seen.insert(seq);
    }
    for (std::uint64_t f = first; f < end && f < first + stream.frames_sent; ++f) {
      if (!seen.contains(static_cast<std::uint32_t>(f))) {
        rep.unseen_frames.push_back(static_cast<std::uint32_t>(f));
      }
    }
    rep.dropped = Keys(server.at("dropped"));
    rep.late = Keys(server.at("late"));
    rep.incomplete = Keys(server.at("incomplete"));
    rep.latency_s = server.at("latency_s");
    const auto& proc = server.at("processing");
    rep.predicted_duty = proc.at("predicted_duty").get<double>();
    if (!proc.at("measured_duty_mean").is_null()) {
      rep.measured_duty = proc.at("measured_duty_mean").get<double>();
      if (rep.predicted_duty > 0) rep.duty_ratio = *rep.measured_duty / rep.predicted_duty;
    }

    for (std::size_t k = 0; k < cfg.num_users; ++k) {
      rep.users.push_back({k, cfg.UserModulation(k), 0, 0, 0.0, std::nullopt});
    }
    if (records) {
      rep.from_capture = true;
      std::vector<const ResultRecord*> sorted;
      for (const auto& r : *records) sorted.push_back(&r);
      std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) {
        return RecordOrder(*a) < RecordOrder(*b);
      });
      frontend::PayloadCache truth(cfg, stream.truth.config.seeds.payload);
      const std::size_t N = cfg.used_subcarriers;
      const std::size_t D = cfg.data_symbols_per_slot;
      std::vector<std::vector<std::uint8_t>> rx_bits(cfg.num_users), ref_bits(cfg.num_users);
      std::vector<std::vector<cdouble>> rx_sym(cfg.num_users), ref_sym(cfg.num_users);
      std::vector<bool> all_symbols(cfg.num_users, true);
      std::set<SubframeKey> covered;
      for (const ResultRecord* r : sorted) {
        if (r->user >= cfg.num_users || r->frame_seq < first || r->frame_seq >= end ||
            r->subframe_idx < 1 || r->subframe_idx > cfg.DataSubframes() ||
            r->slot_idx >= cfg.slots_per_subframe || r->symbol_idx < 1 || r->symbol_idx > D) {
          throw ProvenanceError("capture record does not belong to the streamed run");
        }
        const std::size_t bps = BitsPerSymbol(cfg.UserModulation(r->user));
        if (r->bits_per_symbol != bps || r->bits.size() != N * bps) {
          throw ProvenanceError("capture record modulation or size disagrees with the config");
        }
        covered.insert({r->frame_seq, r->subframe_idx});
        const auto sub = truth.Subframe(r->frame_seq, r->subframe_idx, r->user);
        const std::size_t offset = (r->slot_idx * D + (r->symbol_idx - 1)) * N * bps;
        const auto ref = sub.subspan(offset, N * bps);
        auto& rb = rx_bits[r->user];
        rb.insert(rb.end(), r->bits.begin(), r->bits.end());
        auto& tb = ref_bits[r->user];
        tb.insert(tb.end(), ref.begin(), ref.end());
        if (r->symbols.empty()) {
          all_symbols[r->user] = false;
        } else {
          const auto points = QamModulate(ref, cfg.UserModulation(r->user));
          rx_sym[r->user].insert(rx_sym[r->user].end(), r->symbols.begin(), r->symbols.end());
          ref_sym[r->user].insert(ref_sym[r->user].end(), points.begin(), points.end());
        }
      }
      for (std::size_t k = 0; k < cfg.num_users; ++k) {
        UserRunScore& u = rep.users[k];
        u.bits = rx_bits[k].size();
        if (u.bits == 0) continue;
        u.bit_errors = CountBitErrors(rx_bits[k], ref_bits[k]);
        u.ber = ComputeBer(rx_bits[k], ref_bits[k]);
        if (all_symbols[k]) u.evm_percent = ComputeEvm(rx_sym[k], ref_sym[k]);
      }
      for (std::uint64_t f = first; f < first + std::uint64_t{stream.frames_sent}; ++f) {
        for (std::size_t sf = 1; sf <= cfg.DataSubframes(); ++sf) {
          const SubframeKey key{static_cast<std::uint32_t>(f), static_cast<std::uint8_t>(sf)};
          if (!covered.contains(key)) rep.missing_results.push_back(key);
        }
      }
    } else if (server.value("truth_scored", false)) {
      for (const auto& u : server.at("users")) {
        auto& s = rep.users.at(u.at("user").get<std::size_t>());
        s.bits = u.at("bits").get<std::size_t>();
        s.bit_errors = u.at("bit_errors").get<std::size_t>();
        s.ber = u.at("ber").get<double>();
        s.evm_percent = u.at("evm_percent").get<double>();
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("server report: ") + e.what());
  }
  return rep;
}

ScoreReport ScoreRun(const nlohmann::json& server_report, const frontend::StreamReport& stream,
                     const std::optional<std::filesystem::path>& capture) {
  if (!capture) return ScoreRecords(server_report, stream, nullptr);
  const auto records = LoadCapture(*capture);
  return ScoreRecords(server_report, stream, &records);
}

nlohmann::json ToJson(const ScoreReport& r) {
  using nlohmann::json;
  json users = json::array();
  for (const auto& u : r.users) {
    users.push_back({{"user", u.user},
                     {"modulation", ToString(u.modulation)},
                     {"bits", u.bits},
                     {"bit_errors", u.bit_errors},
                     {"ber", u.ber},
                     {"evm_percent", u.evm_percent ? json(*u.evm_percent) : json(nullptr)}});
  }
  return {{"users", std::move(users)},
          {"source", r.from_capture ? "capture" : "server_report"},
          {"loss",
           {{"missing_results", KeysJson(r.missing_results)},
            {"dropped", KeysJson(r.dropped)},
            {"late", KeysJson(r.late)},
            {"incomplete", KeysJson(r.incomplete)},
            {"unseen_frames", r.unseen_frames}}},
          {"latency_s", r.latency_s},
          {"duty",
           {{"predicted", r.predicted_duty},
            {"measured", r.measured_duty ? json(*r.measured_duty) : json(nullptr)},
            {"ratio", r.duty_ratio ? json(*r.duty_ratio) : json(nullptr)}}}};
}

std::size_t DumpConstellation(const std::vector<ResultRecord>& records, std::size_t user,
                              const std::filesystem::path& out,
                              std::optional<std::size_t> num_users) {
  std::size_t users_seen = 0;
  for (const auto& r : records) users_seen = std::max<std::size_t>(users_seen, r.user + 1u);
  const std::size_t limit = num_users ? *num_users : users_seen;
  if ((num_users || !records.empty()) && user >= limit) {
    throw LengthError("user " + std::to_string(user) + " out of range (" +
                      std::to_string(limit) + " users)");
  }
  std::vector<const ResultRecord*> mine;
  for (const auto& r : records) {
    if (r.user != user) continue;
    if (r.symbols.empty()) {
      throw DomainError("capture has no equalized-symbol dumps for user " +
                        std::to_string(user));
    }
    mine.push_back(&r);
  }
  std::sort(mine.begin(), mine.end(),
            [](auto* a, auto* b) { return RecordOrder(*a) < RecordOrder(*b); });
  std::ofstream csv(out);
  if (!csv) throw ConfigError("cannot write " + out.string());
  csv << "i,q\n";
  char line[64];
  std::size_t rows = 0;
  for (const ResultRecord* r : mine) {
    for (const cdouble& s : r->symbols) {
      std::snprintf(line, sizeof(line), "%.9g,%.9g\n", s.real(), s.imag());
      csv << line;
      ++rows;
    }
  }
  if (!csv) throw ConfigError("failed writing " + out.string());
  return rows;
}

}  // namespace rapro::analytics
