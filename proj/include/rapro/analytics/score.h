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
 * @file score.h
 * @brief Offline scoring of a loopback run and constellation export.
 */
#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "json.hpp"
#include "rapro/frontend/streamer.h"
#include "rapro/wire/assembler.h"
#include "rapro/wire/result_packet.h"

namespace rapro::analytics {

struct UserRunScore {
  std::size_t user = 0;
  Modulation modulation = Modulation::kQpsk;
  std::size_t bits = 0;
  std::size_t bit_errors = 0;
  double ber = 0.0;
  std::optional<double> evm_percent;  // needs symbol dumps
};

struct ScoreReport {
  std::vector<UserRunScore> users;
  /// Streamed subframes with no result in the capture.
  std::vector<wire::SubframeKey> missing_results;
  std::vector<wire::SubframeKey> dropped;
  std::vector<wire::SubframeKey> late;
  std::vector<wire::SubframeKey> incomplete;
  /// Streamed frames the server never saw.
  std::vector<std::uint32_t> unseen_frames;
  nlohmann::json latency_s;
  double predicted_duty = 0.0;
  std::optional<double> measured_duty;
  std::optional<double> duty_ratio;  // measured / predicted
  bool from_capture = false;
};

/// Joins a server report and a stream report, and optionally the server's
/// result capture. Throws ProvenanceError when the link fingerprints or
/// seeds differ or when the server saw frames the stream never sent.
ScoreReport ScoreRun(const nlohmann::json& server_report,
                     const frontend::StreamReport& stream,
                     const std::optional<std::filesystem::path>& capture = std::nullopt);

/// Same scoring over already-decoded result records.
ScoreReport ScoreRecords(const nlohmann::json& server_report,
                         const frontend::StreamReport& stream,
                         const std::vector<wire::ResultRecord>* records);

nlohmann::json ToJson(const ScoreReport& r);

/// Decodes every datagram of a capture file.
std::vector<wire::ResultRecord> LoadCapture(const std::filesystem::path& path);

/// Writes `i,q` CSV rows of user `user`'s equalized symbols, ordered by
/// (frame_seq, subframe, slot, symbol, subcarrier). Throws LengthError when
/// `user` is not below `num_users` (or, if unknown, above every user in a
/// non-empty capture) and DomainError when the capture has no symbol dumps.
/// Returns the number of rows written.
std::size_t DumpConstellation(const std::vector<wire::ResultRecord>& records,
                              std::size_t user, const std::filesystem::path& out,
                              std::optional<std::size_t> num_users = std::nullopt);

}  // namespace rapro::analytics
