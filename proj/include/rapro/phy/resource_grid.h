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
 * @file resource_grid.h
 * @brief Frequency-domain sample containers.
 */
#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace rapro {

using cdouble = std::complex<double>;

/// Row pointers for one OFDM symbol across a set of antennas (or streams).
/// Each span covers the same number of subcarriers.
struct SymbolView {
  std::vector<std::span<const cdouble>> rows;

  std::size_t num_rows() const { return rows.size(); }
  std::size_t num_subcarriers() const {
    return rows.empty() ? 0 : rows.front().size();
  }
};

/// Complex samples indexed (stream, symbol, subcarrier), stream-major.
/// A stream is a BS antenna for received grids and a user for transmit grids.
class ResourceGrid {
 public:
  ResourceGrid() = default;
  ResourceGrid(std::size_t num_streams, std::size_t num_symbols,
               std::size_t num_subcarriers)
      : streams_(num_streams),
        symbols_(num_symbols),
        subcarriers_(num_subcarriers),
        data_(num_streams * num_symbols * num_subcarriers) {}

  std::size_t num_streams() const { return streams_; }
  std::size_t num_symbols() const { return symbols_; }
  std::size_t num_subcarriers() const { return subcarriers_; }
  std::size_t size() const { return data_.size(); }

  cdouble& at(std::size_t stream, std::size_t symbol, std::size_t sc) {
    return data_[Offset(stream, symbol) + sc];
  }
  const cdouble& at(std::size_t stream, std::size_t symbol,
                    std::size_t sc) const {
    return data_[Offset(stream, symbol) + sc];
  }

  std::span<cdouble> row(std::size_t stream, std::size_t symbol) {
    return {data_.data() + Offset(stream, symbol), subcarriers_};
  }
  std::span<const cdouble> row(std::size_t stream, std::size_t symbol) const {
    return {data_.data() + Offset(stream, symbol), subcarriers_};
  }

  SymbolView Symbol(std::size_t symbol) const {
    SymbolView v;
    v.rows.reserve(streams_);
    for (std::size_t s = 0; s < streams_; ++s) v.rows.push_back(row(s, symbol));
    return v;
  }

  std::span<cdouble> data() { return data_; }
  std::span<const cdouble> data() const { return data_; }

  bool AllFinite() const;

  bool operator==(const ResourceGrid&) const = default;

 private:
  std::size_t Offset(std::size_t stream, std::size_t symbol) const {
    return (stream * symbols_ + symbol) * subcarriers_;
  }

  std::size_t streams_ = 0;
  std::size_t symbols_ = 0;
  std::size_t subcarriers_ = 0;
  std::vector<cdouble> data_;
};

/// A stack of equally-sized column-major complex matrices, one per
/// subcarrier. Used for both ground-truth and estimated channels.
class MatrixStack {
 public:
  MatrixStack() = default;
  MatrixStack(std::size_t count, std::size_t rows, std::size_t cols)
      : count_(count), rows_(rows), cols_(cols), data_(count * rows * cols) {}

  std::size_t count() const { return count_; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  cdouble& at(std::size_t n, std::size_t r, std::size_t c) {
    return data_[n * rows_ * cols_ + c * rows_ + r];
  }
  const cdouble& at(std::size_t n, std::size_t r, std::size_t c) const {
    return data_[n * rows_ * cols_ + c * rows_ + r];
  }
  std::span<const cdouble> matrix(std::size_t n) const {
    return {data_.data() + n * rows_ * cols_, rows_ * cols_};
  }
  std::span<cdouble> matrix(std::size_t n) {
    return {data_.data() + n * rows_ * cols_, rows_ * cols_};
  }

  bool AllFinite() const;

  bool operator==(const MatrixStack&) const = default;

 private:
  std::size_t count_ = 0;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<cdouble> data_;
};

}  // namespace rapro
