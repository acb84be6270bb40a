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
#include "rapro/wire/assembler.h"

#include <algorithm>
#include <cassert>
#include <string>

#include "rapro/wire/q15.h"

namespace rapro::wire {

std::string_view ToString(FeedEvent e) {
  switch (e) {
    case FeedEvent::kAccepted:
      return "Accepted";
    case FeedEvent::kSubframeComplete:
      return "SubframeComplete";
    case FeedEvent::kDuplicate:
      return "Duplicate";
    case FeedEvent::kStale:
      return "Stale";
    case FeedEvent::kMarkerSeen:
      return "MarkerSeen";
  }
  return "?";
}

SubframeBuffer::SubframeBuffer(SubframeKey key, std::vector<std::uint8_t> antennas,
                               std::size_t symbols, std::size_t subcarriers,
                               std::size_t samples_per_packet, TimePoint now)
    : key_(key),
      antennas_(std::move(antennas)),
      grid_(antennas_.size(), symbols, subcarriers),
      samples_per_packet_(samples_per_packet),
      fragments_per_row_(subcarriers / samples_per_packet),
      filled_(antennas_.size() * symbols * fragments_per_row_, 0),
      first_arrival_(now),
      last_arrival_(now) {}

bool SubframeBuffer::Write(std::size_t local_antenna, std::size_t symbol,
                           std::size_t fragment,
                           std::span<const cdouble> samples, TimePoint now) {
  assert(owner_ == Owner::kAssembler && "write after handoff");
  const std::size_t bit =
      (local_antenna * grid_.num_symbols() + symbol) * fragments_per_row_ +
      fragment;
  if (filled_[bit]) return false;
  filled_[bit] = 1;
  ++received_;
  payload_bytes_ += samples.size() * kBytesPerSample;
  auto row = grid_.row(local_antenna, symbol);
  std::copy(samples.begin(), samples.end(),
            row.begin() + static_cast<std::ptrdiff_t>(fragment * samples_per_packet_));
  last_arrival_ = std::max(last_arrival_, now);
  return true;
}

std::vector<FragmentId> SubframeBuffer::Missing() const {
  std::vector<FragmentId> missing;
  const std::size_t symbols = grid_.num_symbols();
  for (std::size_t a = 0; a < antennas_.size(); ++a) {
    for (std::size_t s = 0; s < symbols; ++s) {
      for (std::size_t f = 0; f < fragments_per_row_; ++f) {
        if (!filled_[(a * symbols + s) * fragments_per_row_ + f]) {
          missing.push_back({antennas_[a], static_cast<std::uint8_t>(s),
                             static_cast<std::uint16_t>(f)});
        }
      }
    }
  }
  return missing;
}

AssemblerConfig AssemblerConfig::From(const FrameConfig& cfg,
                                      std::size_t samples_per_packet,
                                      std::size_t antenna_stride,
                                      std::size_t antenna_offset) {
  AssemblerConfig c;
  c.limits = WireLimits::From(cfg);
  c.samples_per_packet = samples_per_packet;
  c.antenna_stride = antenna_stride;
  c.antenna_offset = antenna_offset;
  return c;
}

std::vector<std::uint8_t> AssemblerConfig::OwnedAntennas() const {
  std::vector<std::uint8_t> owned;
  for (std::size_t m = antenna_offset; m < limits.num_antennas; m += antenna_stride) {
    owned.push_back(static_cast<std::uint8_t>(m));
  }
  return owned;
}

Assembler::Assembler(AssemblerConfig config)
    : config_(std::move(config)),
      owned_(config_.OwnedAntennas()),
      local_index_(config_.limits.num_antennas, -1) {
  if (config_.antenna_stride == 0 ||
      config_.antenna_offset >= config_.antenna_stride) {
    throw ConfigError("invalid antenna routing for assembler");
  }
  if (config_.samples_per_packet == 0 ||
      config_.limits.used_subcarriers % config_.samples_per_packet != 0) {
    throw ConfigError("samples_per_packet must divide used_subcarriers");
  }
  if (config_.window_frames < 1) throw ConfigError("window_frames must be >= 1");
  for (std::size_t i = 0; i < owned_.size(); ++i) {
    local_index_[owned_[i]] = static_cast<int>(i);
  }
}

bool Assembler::IsStale(std::uint32_t frame_seq) const {
  return newest_ && frame_seq < *newest_ &&
         *newest_ - frame_seq >= config_.window_frames;
}

IncompleteSubframe Assembler::Evict(const SubframeBuffer& buf) {
  IncompleteSubframe inc;
  inc.key = buf.key();
  inc.missing = buf.Missing();
  inc.received_fragments = buf.received_fragments();
  inc.expected_fragments = buf.expected_fragments();
  inc.payload_bytes = buf.payload_bytes();
  ++stats_.incomplete_subframes;
  stats_.incomplete_payload_bytes += buf.payload_bytes();
  return inc;
}

void Assembler::AdvanceTo(std::uint32_t frame_seq,
                          std::vector<IncompleteSubframe>& evicted) {
  if (newest_ && frame_seq <= *newest_) return;
  newest_ = frame_seq;
  for (auto it = pending_.begin(); it != pending_.end();) {
    if (IsStale(it->first.frame_seq)) {
      evicted.push_back(Evict(*it->second));
      it = pending_.erase(it);
    } else {
      ++it;
    }
  }
  std::erase_if(closed_, [&](const SubframeKey& k) { return IsStale(k.frame_seq); });
}

void Assembler::Reset(std::uint32_t frame_seq,
                      std::vector<IncompleteSubframe>& evicted) {
  newest_ = frame_seq;
  auto outside = [&](std::uint32_t f) { return f > frame_seq || IsStale(f); };
  for (auto it = pending_.begin(); it != pending_.end();) {
    if (outside(it->first.frame_seq)) {
      evicted.push_back(Evict(*it->second));
      it = pending_.erase(it);
    } else {
      ++it;
    }
  }
  std::erase_if(closed_, [&](const SubframeKey& k) { return outside(k.frame_seq); });
}

FeedOutcome Assembler::Feed(const SampleHeader& header,
                            std::span<const cdouble> samples, TimePoint now) {
  CheckRange(header, config_.limits);
  FeedOutcome out;

  if (header.IsMarker()) {
    ++stats_.packets;
    ++stats_.markers;
    out.event = FeedEvent::kMarkerSeen;
    const std::uint32_t f = header.frame_seq;
    if (!newest_ || f >= *newest_) {
      AdvanceTo(f, out.evicted);
    } else if (IsStale(f)) {
      // Far behind the window: the source restarted its sequence.
      Reset(f, out.evicted);
    }
    return out;
  }

  if (samples.size() != header.sample_count) {
    throw WireError(WireError::Kind::kTruncated,
                    "sample span does not match sample_count");
  }
  if (header.sample_count != config_.samples_per_packet ||
      header.subcarrier_start % config_.samples_per_packet != 0) {
    throw WireError(WireError::Kind::kRange,
                    "fragment geometry does not match samples_per_packet " +
                        std::to_string(config_.samples_per_packet));
  }
  const int local = local_index_[header.antenna_idx];
  if (local < 0) {
    throw WireError(WireError::Kind::kRange,
                    "antenna " + std::to_string(header.antenna_idx) +
                        " is not routed to this port");
  }

  ++stats_.packets;
  if (IsStale(header.frame_seq)) {
    ++stats_.stale;
    out.event = FeedEvent::kStale;
    return out;
  }
  AdvanceTo(header.frame_seq, out.evicted);

  const SubframeKey key{header.frame_seq, header.subframe_idx};
  if (closed_.contains(key)) {
    ++stats_.duplicates;
    out.event = FeedEvent::kDuplicate;
    return out;
  }

  auto it = pending_.find(key);
  if (it == pending_.end()) {
    it = pending_
             .emplace(key, std::make_unique<SubframeBuffer>(
                               key, owned_, config_.SymbolsPerSubframe(),
                               config_.limits.used_subcarriers,
                               config_.samples_per_packet, now))
             .first;
  }
  SubframeBuffer& buf = *it->second;
  const std::size_t symbol =
      static_cast<std::size_t>(header.slot_idx) * config_.limits.symbols_per_slot +
      header.symbol_idx;
  const std::size_t fragment = header.subcarrier_start / config_.samples_per_packet;
  if (!buf.Write(static_cast<std::size_t>(local), symbol, fragment, samples, now)) {
    ++stats_.duplicates;
    out.event = FeedEvent::kDuplicate;
    return out;
  }
  ++stats_.accepted;
  stats_.accepted_payload_bytes += samples.size() * kBytesPerSample;

  if (buf.complete()) {
    ++stats_.completed_subframes;
    stats_.completed_payload_bytes += buf.payload_bytes();
    out.event = FeedEvent::kSubframeComplete;
    out.completed = std::move(it->second);
    pending_.erase(it);
    closed_.insert(key);
    return out;
  }
  out.event = FeedEvent::kAccepted;
  return out;
}

std::vector<IncompleteSubframe> Assembler::Pending() const {
  std::vector<IncompleteSubframe> out;
  for (const auto& [key, buf] : pending_) {
    IncompleteSubframe inc;
    inc.key = key;
    inc.missing = buf->Missing();
    inc.received_fragments = buf->received_fragments();
    inc.expected_fragments = buf->expected_fragments();
    inc.payload_bytes = buf->payload_bytes();
    out.push_back(std::move(inc));
  }
  return out;
}

std::vector<IncompleteSubframe> Assembler::ExpireOlderThan(TimePoint cutoff) {
  std::vector<IncompleteSubframe> out;
  for (auto it = pending_.begin(); it != pending_.end();) {
    if (it->second->last_arrival() < cutoff) {
      out.push_back(Evict(*it->second));
      closed_.insert(it->first);  // late stragglers become duplicates
      it = pending_.erase(it);
    } else {
      ++it;
    }
  }
  return out;
}

std::vector<IncompleteSubframe> Assembler::Drain() {
  std::vector<IncompleteSubframe> out;
  for (auto& [key, buf] : pending_) {
    out.push_back(Evict(*buf));
    closed_.insert(key);
  }
  pending_.clear();
  return out;
}

}  // namespace rapro::wire
