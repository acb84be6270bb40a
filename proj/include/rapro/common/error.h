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
 * @file error.h
 * @brief Exception types shared by all rapro modules.
 */
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rapro {

/// Root of every error thrown by rapro. `kind()` is a stable machine-readable
/// tag used by the CLI error JSON.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

/// Invalid FrameConfig / config file contents.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error("config", what) {}
};

/// Input sequence has a length incompatible with the operation.
class LengthError : public Error {
 public:
  explicit LengthError(const std::string& what) : Error("length", what) {}
};

/// Argument outside the operation's domain (e.g. all-zero EVM reference).
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error("domain", what) {}
};

class SingularMatrixError : public Error {
 public:
  SingularMatrixError(std::size_t subcarrier, const std::string& what)
      : Error("singular_matrix", what), subcarrier_(subcarrier) {}
  /// Subcarrier index of the failing solve, or npos when not applicable.
  std::size_t subcarrier() const { return subcarrier_; }
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  std::size_t subcarrier_;
};

class TransportError : public Error {
 public:
  explicit TransportError(const std::string& what) : Error("transport", what) {}
};

/// Reports that were produced from different seeds/configs were joined.
class ProvenanceError : public Error {
 public:
  explicit ProvenanceError(const std::string& what)
      : Error("provenance", what) {}
};

/// Internal invariant violated; indicates a bug rather than bad input.
class InternalError : public Error {
 public:
  explicit InternalError(const std::string& what) : Error("internal", what) {}
};

}  // namespace rapro
