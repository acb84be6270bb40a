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
#include "rapro/wire/result_packet.h"

#include <bit>
#include <iterator>

#include "rapro/common/error.h"
#include "rapro/wire/packet.h"

namespace rapro::wire {

namespace {

void Put16(std::vector<std::uint8_t>& v, std::size_t off, std::uint16_t x) {
  v[off] = static_cast<std::uint8_t>(x & 0xFF);
  v[off + 1] = static_cast<std::uint8_t>(x >> 8);
}

void Put32(std::vector<std::uint8_t>& v, std::size_t off, std::uint32_t x) {
  for (int i = 0; i < 4; ++i) v[off + i] = static_cast<std::uint8_t>(x >> (8 * i));
}

std::uint16_t Get16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t Get32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

std::size_t PackedBytes(std::size_t bits) { return (bits + 7) / 8; }

}  // namespace

std::vector<std::uint8_t> EncodeResult(const ResultRecord& r) {
  if (r.bits_per_symbol == 0 || r.bits.size() % r.bits_per_symbol != 0) {
    throw LengthError("result bits do not fill whole symbols");
  }
  const std::size_t count = r.sample_count();
  if (count > 65535) throw LengthError("too many samples for one result record");
  if (!r.symbols.empty() && r.symbols.size() != count) {
    throw LengthError("symbol dump length does not match the bit count");
  }
  const bool with_symbols = !r.symbols.empty();
  const std::size_t bit_bytes = PackedBytes(r.bits.size());
  std::vector<std::uint8_t> out(kResultHeaderBytes + bit_bytes +
                                (with_symbols ? 8 * count : 0));
  Put16(out, 0, kResultMagic);
  out[2] = kResultVersion;
  out[3] = with_symbols ? kResultFlagSymbols : 0;
  Put32(out, 4, r.frame_seq);
  out[8] = r.subframe_idx;
  out[9] = r.slot_idx;
  out[10] = r.symbol_idx;
  out[11] = r.user;
  out[12] = r.bits_per_symbol;
  Put16(out, 14, static_cast<std::uint16_t>(count));
  Put16(out, 16, r.erased_count);
  Put32(out, 20, std::bit_cast<std::uint32_t>(r.noise_var));

  std::uint8_t* bits = out.data() + kResultHeaderBytes;
  for (std::size_t i = 0; i < r.bits.size(); ++i) {
    if (r.bits[i] & 1U) bits[i / 8] |= static_cast<std::uint8_t>(0x80U >> (i % 8));
  }
  if (with_symbols) {
    std::size_t off = kResultHeaderBytes + bit_bytes;
    for (const auto& s : r.symbols) {
      Put32(out, off, std::bit_cast<std::uint32_t>(static_cast<float>(s.real())));
      Put32(out, off + 4, std::bit_cast<std::uint32_t>(static_cast<float>(s.imag())));
      off += 8;
    }
  }
  return out;
}

ResultRecord DecodeResult(std::span<const std::uint8_t> bytes) {
  const std::uint8_t* p = bytes.data();
  if (bytes.size() >= 2 && Get16(p) != kResultMagic) {
    throw WireError(WireError::Kind::kMalformed, "bad result magic");
  }
  if (bytes.size() < kResultHeaderBytes) {
    throw WireError(WireError::Kind::kTruncated, "result shorter than header");
  }
  if (p[2] != kResultVersion) {
    throw WireError(WireError::Kind::kMalformed, "unsupported result version");
  }
  ResultRecord r;
  const bool with_symbols = (p[3] & kResultFlagSymbols) != 0;
  r.frame_seq = Get32(p + 4);
  r.subframe_idx = p[8];
  r.slot_idx = p[9];
  r.symbol_idx = p[10];
  r.user = p[11];
  r.bits_per_symbol = p[12];
  const std::size_t count = Get16(p + 14);
  r.erased_count = Get16(p + 16);
  r.noise_var = std::bit_cast<float>(Get32(p + 20));
  if (r.bits_per_symbol == 0) {
    throw WireError(WireError::Kind::kMalformed, "zero bits_per_symbol");
  }
  const std::size_t nbits = count * r.bits_per_symbol;
  const std::size_t expected = kResultHeaderBytes + PackedBytes(nbits) +
                               (with_symbols ? 8 * count : 0);
  if (bytes.size() != expected) {
    throw WireError(WireError::Kind::kTruncated,
                    "result datagram is " + std::to_string(bytes.size()) +
                        " bytes, expected " + std::to_string(expected));
  }
  r.bits.resize(nbits);
  const std::uint8_t* bits = p + kResultHeaderBytes;
  for (std::size_t i = 0; i < nbits; ++i) {
    r.bits[i] = static_cast<std::uint8_t>((bits[i / 8] >> (7 - i % 8)) & 1U);
  }
  if (with_symbols) {
    r.symbols.resize(count);
    const std::uint8_t* s = bits + PackedBytes(nbits);
    for (std::size_t i = 0; i < count; ++i) {
      r.symbols[i] = {std::bit_cast<float>(Get32(s + 8 * i)),
                      std::bit_cast<float>(Get32(s + 8 * i + 4))};
    }
  }
  return r;
}

CaptureWriter::CaptureWriter(const std::filesystem::path& path)
    : out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw TransportError("cannot open capture file " + path.string());
}

void CaptureWriter::Append(std::span<const std::uint8_t> datagram) {
  const auto len = static_cast<std::uint32_t>(datagram.size());
  const std::uint8_t prefix[4] = {
      static_cast<std::uint8_t>(len), static_cast<std::uint8_t>(len >> 8),
      static_cast<std::uint8_t>(len >> 16), static_cast<std::uint8_t>(len >> 24)};
  out_.write(reinterpret_cast<const char*>(prefix), 4);
  out_.write(reinterpret_cast<const char*>(datagram.data()),
             static_cast<std::streamsize>(datagram.size()));
}

std::vector<std::vector<std::uint8_t>> ReadCapture(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TransportError("cannot open capture file " + path.string());
  std::vector<std::uint8_t> raw((std::istreambuf_iterator<char>(in)),
                                std::istreambuf_iterator<char>());
  std::vector<std::vector<std::uint8_t>> out;
  std::size_t off = 0;
  while (off < raw.size()) {
    if (raw.size() - off < 4) {
      throw WireError(WireError::Kind::kTruncated, "capture ends inside a length prefix");
    }
    const std::size_t len = Get32(raw.data() + off);
    off += 4;
    if (raw.size() - off < len) {
      throw WireError(WireError::Kind::kTruncated, "capture ends inside a record");
    }
    out.emplace_back(raw.begin() + static_cast<std::ptrdiff_t>(off),
                     raw.begin() + static_cast<std::ptrdiff_t>(off + len));
    off += len;
  }
  return out;
}

}  // namespace rapro::wire
