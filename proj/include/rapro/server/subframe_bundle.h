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
 * @file subframe_bundle.h
 * @brief Read-only join of the per-port buffers that make up one subframe.
 *
 * Each receive worker reassembles only the antennas routed to its port, so a
 * complete subframe arrives as one SubframeBuffer per port. The bundle takes
 * ownership of all of them and exposes antenna rows in global order without
 * copying samples.
 */
#pragma once

#include <memory>
#include <vector>

#include "rapro/phy/resource_grid.h"
#include "rapro/wire/assembler.h"

namespace rapro::server {

using wire::SubframeKey;
using wire::TimePoint;

class SubframeBundle {
 public:
  /// Throws InternalError unless the parts are complete, share `key`, and
  /// cover antennas 0..num_antennas-1 exactly once.
  SubframeBundle(SubframeKey key,
                 std::vector<std::unique_ptr<wire::SubframeBuffer>> parts,
                 std::size_t num_antennas, TimePoint completed_at);

  /// Bundle over a plain M x symbols x N_sc grid, for tests and tools.
  SubframeBundle(SubframeKey key, ResourceGrid grid, TimePoint completed_at = {});

  // Rows point into owned storage, so bundles stay put once built.
  SubframeBundle(const SubframeBundle&) = delete;
  SubframeBundle& operator=(const SubframeBundle&) = delete;

  const SubframeKey& key() const { return key_; }
  std::size_t num_antennas() const { return rows_.size(); }
  std::size_t num_symbols() const { return symbols_; }
  std::size_t num_subcarriers() const { return subcarriers_; }

  /// Rows of symbol `s` ordered by global antenna index.
  SymbolView Symbol(std::size_t s) const;

  /// Earliest packet arrival across parts.
  TimePoint first_arrival() const { return first_arrival_; }
  /// When the last part completed.
  TimePoint completed_at() const { return completed_at_; }
  std::size_t payload_bytes() const { return payload_bytes_; }

 private:
  struct RowRef {
    const ResourceGrid* grid;
    std::size_t row;
  };

  SubframeKey key_;
  std::vector<std::unique_ptr<wire::SubframeBuffer>> parts_;
  ResourceGrid owned_;
  std::vector<RowRef> rows_;
  std::size_t symbols_ = 0;
  std::size_t subcarriers_ = 0;
  TimePoint first_arrival_{};
  TimePoint completed_at_{};
  std::size_t payload_bytes_ = 0;
};

}  // namespace rapro::server
