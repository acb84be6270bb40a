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
 * @file transport.h
 * @brief Datagram transports: UDP sockets and in-process links for tests.
 */
#pragma once

#include <sys/socket.h>

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rapro/common/mailbox.h"

namespace rapro {

struct Endpoint {
  std::string host;
  std::uint16_t port = 0;

  /// "1.2.3.4:5000" or "[::1]:5000".
  static Endpoint Parse(std::string_view text);
  /// Comma-separated list.
  static std::vector<Endpoint> ParseList(std::string_view text);
  std::string ToString() const;
  bool operator==(const Endpoint&) const = default;
};

/// Sends datagrams on one of several routes (destination endpoints).
class DatagramSink {
 public:
  virtual ~DatagramSink() = default;
  virtual std::size_t num_routes() const = 0;
  /// Returns false if the datagram could not be handed to the transport.
  virtual bool Send(std::size_t route, std::span<const std::uint8_t> datagram) = 0;
};

class DatagramSource {
 public:
  virtual ~DatagramSource() = default;
  /// Copies one datagram into `buf` and returns its length, or nullopt on
  /// timeout. Datagrams larger than `buf` are truncated.
  virtual std::optional<std::size_t> Receive(std::span<std::uint8_t> buf,
                                             std::chrono::milliseconds timeout) = 0;
};

/// RAII UDP socket.
class UdpSocket {
 public:
  UdpSocket() = default;
  ~UdpSocket();
  UdpSocket(UdpSocket&& other) noexcept;
  UdpSocket& operator=(UdpSocket&& other) noexcept;
  UdpSocket(const UdpSocket&) = delete;
  UdpSocket& operator=(const UdpSocket&) = delete;

  /// Binds to `local`; port 0 picks an ephemeral port. Throws TransportError.
  static UdpSocket Bind(const Endpoint& local, std::size_t receive_buffer = 0);
  /// Unbound socket of the family matching `peer`.
  static UdpSocket ForPeer(const Endpoint& peer, std::size_t send_buffer = 0);

  Endpoint LocalEndpoint() const;
  int fd() const { return fd_; }

 private:
  explicit UdpSocket(int fd) : fd_(fd) {}
  int fd_ = -1;
};

struct SocketAddress {
  sockaddr_storage storage{};
  socklen_t length = 0;
  static SocketAddress Resolve(const Endpoint& ep);
};

class UdpSink : public DatagramSink {
 public:
  explicit UdpSink(const std::vector<Endpoint>& destinations);
  std::size_t num_routes() const override { return routes_.size(); }
  bool Send(std::size_t route, std::span<const std::uint8_t> datagram) override;

 private:
  struct Route {
    UdpSocket socket;
    SocketAddress address;
  };
  std::vector<Route> routes_;
};

class UdpSource : public DatagramSource {
 public:
  explicit UdpSource(UdpSocket socket) : socket_(std::move(socket)) {}
  static std::unique_ptr<UdpSource> Listen(const Endpoint& local,
                                           std::size_t receive_buffer = 32u << 20);
  std::optional<std::size_t> Receive(std::span<std::uint8_t> buf,
                                     std::chrono::milliseconds timeout) override;
  Endpoint LocalEndpoint() const { return socket_.LocalEndpoint(); }

 private:
  UdpSocket socket_;
};

/// In-process datagram link: a DatagramSink with one queue per route, each
/// readable through a DatagramSource.
class MemoryLink : public DatagramSink {
 public:
  explicit MemoryLink(std::size_t routes);
  std::size_t num_routes() const override { return queues_.size(); }
  bool Send(std::size_t route, std::span<const std::uint8_t> datagram) override;
  /// Source reading route `route`. The link must outlive it.
  std::unique_ptr<DatagramSource> Source(std::size_t route);
  Mailbox<std::vector<std::uint8_t>>& queue(std::size_t route) {
    return *queues_[route];
  }

 private:
  std::vector<std::unique_ptr<Mailbox<std::vector<std::uint8_t>>>> queues_;
};

}  // namespace rapro
