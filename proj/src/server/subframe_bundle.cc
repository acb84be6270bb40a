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
#include "rapro/server/subframe_bundle.h"

#include <algorithm>
#include <string>

#include "rapro/common/error.h"

namespace rapro::server {

SubframeBundle::SubframeBundle(SubframeKey key,
                               std::vector<std::unique_ptr<wire::SubframeBuffer>> parts,
                               std::size_t num_antennas, TimePoint completed_at)
    : key_(key), parts_(std::move(parts)), completed_at_(completed_at) {
  rows_.assign(num_antennas, RowRef{nullptr, 0});
  bool first = true;
  for (auto& part : parts_) {
    if (!part || !part->complete() || part->key() != key) {
      throw InternalError("bundle part is missing, incomplete or mislabeled");
    }
    const ResourceGrid& g = part->grid();
    if (first) {
      symbols_ = g.num_symbols();
      subcarriers_ = g.num_subcarriers();
      first_arrival_ = part->first_arrival();
      first = false;
    } else if (g.num_symbols() != symbols_ || g.num_subcarriers() != subcarriers_) {
      throw InternalError("bundle parts disagree on geometry");
    }
    first_arrival_ = std::min(first_arrival_, part->first_arrival());
    payload_bytes_ += part->payload_bytes();
    for (std::size_t local = 0; local < part->antennas().size(); ++local) {
      const std::size_t m = part->antennas()[local];
      if (m >= num_antennas || rows_[m].grid != nullptr) {
        throw InternalError("antenna " + std::to_string(m) +
                            " is out of range or covered twice");
      }
      rows_[m] = {&g, local};
    }
    part->ReleaseToProcessing();
  }
  for (std::size_t m = 0; m < num_antennas; ++m) {
    if (rows_[m].grid == nullptr) {
      throw InternalError("antenna " + std::to_string(m) + " missing from bundle");
    }
  }
}

SubframeBundle::SubframeBundle(SubframeKey key, ResourceGrid grid, TimePoint completed_at)
    : key_(key), owned_(std::move(grid)), completed_at_(completed_at) {
  symbols_ = owned_.num_symbols();
  subcarriers_ = owned_.num_subcarriers();
  first_arrival_ = completed_at;
  payload_bytes_ = owned_.size() * 4;
  for (std::size_t m = 0; m < owned_.num_streams(); ++m) rows_.push_back({&owned_, m});
}

SymbolView SubframeBundle::Symbol(std::size_t s) const {
  SymbolView v;
  v.rows.reserve(rows_.size());
  for (const RowRef& r : rows_) v.rows.push_back(r.grid->row(r.row, s));
  return v;
}

}  // namespace rapro::server
