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
#include "rapro/common/transport.h"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstring>

#include "rapro/common/error.h"

namespace rapro {

namespace {

std::string Errno(const std::string& what) {
  return what + ": " + std::strerror(errno);
}

void SetBuffer(int fd, int option, int force_option, std::size_t bytes) {
  if (bytes == 0) return;
  const int value = static_cast<int>(std::min<std::size_t>(bytes, 1u << 30));
  // The FORCE variant ignores rmem_max/wmem_max but needs CAP_NET_ADMIN.
  if (setsockopt(fd, SOL_SOCKET, force_option, &value, sizeof(value)) != 0) {
    setsockopt(fd, SOL_SOCKET, option, &value, sizeof(value));
  }
}

}  // namespace

Endpoint Endpoint::Parse(std::string_view text) {
  Endpoint ep;
  std::string_view host;
  std::string_view port;
  if (!text.empty() && text.front() == '[') {
    const auto close = text.find(']');
    if (close == std::string_view::npos || close + 1 >= text.size() ||
        text[close + 1] != ':') {
      throw ConfigError("bad endpoint '" + std::string(text) + "'");
    }
    host = text.substr(1, close - 1);
    port = text.substr(close + 2);
  } else {
    const auto colon = text.rfind(':');
    if (colon == std::string_view::npos) {
      throw ConfigError("endpoint '" + std::string(text) + "' lacks a port");
    }
    host = text.substr(0, colon);
    port = text.substr(colon + 1);
  }
  unsigned value = 0;
  const auto [ptr, ec] = std::from_chars(port.data(), port.data() + port.size(), value);
  if (ec != std::errc() || ptr != port.data() + port.size() || value > 65535 ||
      host.empty()) {
    throw ConfigError("bad endpoint '" + std::string(text) + "'");
  }
  ep.host = std::string(host);
  ep.port = static_cast<std::uint16_t>(value);
  return ep;
}

std::vector<Endpoint> Endpoint::ParseList(std::string_view text) {
  std::vector<Endpoint> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto item = text.substr(start, comma == std::string_view::npos
                                             ? std::string_view::npos
                                             : comma - start);
    if (!item.empty()) out.push_back(Parse(item));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (out.empty()) throw ConfigError("empty endpoint list");
  return out;
}

std::string Endpoint::ToString() const {
  if (host.find(':') != std::string::npos) {
    return "[" + host + "]:" + std::to_string(port);
  }
  return host + ":" + std::to_string(port);
}

SocketAddress SocketAddress::Resolve(const Endpoint& ep) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_DGRAM;
  hints.ai_flags = AI_NUMERICSERV;
  addrinfo* result = nullptr;
  const std::string port = std::to_string(ep.port);
  const int rc = getaddrinfo(ep.host.c_str(), port.c_str(), &hints, &result);
  if (rc != 0 || result == nullptr) {
    throw TransportError("cannot resolve " + ep.ToString() + ": " +
                         gai_strerror(rc));
  }
  SocketAddress addr;
  std::memcpy(&addr.storage, result->ai_addr, result->ai_addrlen);
  addr.length = static_cast<socklen_t>(result->ai_addrlen);
  freeaddrinfo(result);
  return addr;
}

UdpSocket::~UdpSocket() {
  if (fd_ >= 0) ::close(fd_);
}

UdpSocket::UdpSocket(UdpSocket&& other) noexcept : fd_(other.fd_) {
  other.fd_ = -1;
}

UdpSocket& UdpSocket::operator=(UdpSocket&& other) noexcept {
  if (this != &other) {
    if (fd_ >= 0) ::close(fd_);
    fd_ = other.fd_;
    other.fd_ = -1;
  }
  return *this;
}

UdpSocket UdpSocket::Bind(const Endpoint& local, std::size_t receive_buffer) {
  const SocketAddress addr = SocketAddress::Resolve(local);
  const int fd = ::socket(addr.storage.ss_family, SOCK_DGRAM, 0);
  if (fd < 0) throw TransportError(Errno("socket"));
  UdpSocket sock(fd);
  const int one = 1;
  setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  SetBuffer(fd, SO_RCVBUF, SO_RCVBUFFORCE, receive_buffer);
  if (::bind(fd, reinterpret_cast<const sockaddr*>(&addr.storage), addr.length) != 0) {
    throw TransportError(Errno("bind " + local.ToString()));
  }
  return sock;
}

UdpSocket UdpSocket::ForPeer(const Endpoint& peer, std::size_t send_buffer) {
  const SocketAddress addr = SocketAddress::Resolve(peer);
  const int fd = ::socket(addr.storage.ss_family, SOCK_DGRAM, 0);
  if (fd < 0) throw TransportError(Errno("socket"));
  UdpSocket sock(fd);
  SetBuffer(fd, SO_SNDBUF, SO_SNDBUFFORCE, send_buffer);
  return sock;
}

Endpoint UdpSocket::LocalEndpoint() const {
  sockaddr_storage ss{};
  socklen_t len = sizeof(ss);
  if (getsockname(fd_, reinterpret_cast<sockaddr*>(&ss), &len) != 0) {
    throw TransportError(Errno("getsockname"));
  }
  char host[NI_MAXHOST];
  char serv[NI_MAXSERV];
  if (getnameinfo(reinterpret_cast<sockaddr*>(&ss), len, host, sizeof(host),
                  serv, sizeof(serv), NI_NUMERICHOST | NI_NUMERICSERV) != 0) {
    throw TransportError("getnameinfo failed");
  }
  return Endpoint{host, static_cast<std::uint16_t>(std::stoi(serv))};
}

UdpSink::UdpSink(const std::vector<Endpoint>& destinations) {
  for (const auto& ep : destinations) {
    routes_.push_back({UdpSocket::ForPeer(ep, 8u << 20), SocketAddress::Resolve(ep)});
  }
}

bool UdpSink::Send(std::size_t route, std::span<const std::uint8_t> datagram) {
  Route& r = routes_.at(route);
  for (int attempt = 0; attempt < 100; ++attempt) {
    const ssize_t n = ::sendto(r.socket.fd(), datagram.data(), datagram.size(), 0,
                               reinterpret_cast<const sockaddr*>(&r.address.storage),
                               r.address.length);
    if (n == static_cast<ssize_t>(datagram.size())) return true;
    if (n < 0 && (errno == ENOBUFS || errno == EAGAIN || errno == EINTR)) {
      ::usleep(50);
      continue;
    }
    return false;
  }
  return false;
}

std::unique_ptr<UdpSource> UdpSource::Listen(const Endpoint& local,
                                             std::size_t receive_buffer) {
  return std::make_unique<UdpSource>(UdpSocket::Bind(local, receive_buffer));
}

std::optional<std::size_t> UdpSource::Receive(std::span<std::uint8_t> buf,
                                              std::chrono::milliseconds timeout) {
  const ssize_t quick = ::recv(socket_.fd(), buf.data(), buf.size(), MSG_DONTWAIT);
  if (quick >= 0) return static_cast<std::size_t>(quick);
  if (errno != EAGAIN && errno != EWOULDBLOCK && errno != EINTR) {
    throw TransportError(Errno("recv"));
  }
  pollfd pfd{socket_.fd(), POLLIN, 0};
  const int rc = ::poll(&pfd, 1, static_cast<int>(timeout.count()));
  if (rc < 0 && errno != EINTR) throw TransportError(Errno("poll"));
  if (rc <= 0) return std::nullopt;
  const ssize_t n = ::recv(socket_.fd(), buf.data(), buf.size(), MSG_DONTWAIT);
  if (n < 0) {
    if (errno == EAGAIN || errno == EWOULDBLOCK || errno == EINTR) return std::nullopt;
    throw TransportError(Errno("recv"));
  }
  return static_cast<std::size_t>(n);
}

MemoryLink::MemoryLink(std::size_t routes) {
  for (std::size_t i = 0; i < routes; ++i) {
    queues_.push_back(std::make_unique<Mailbox<std::vector<std::uint8_t>>>());
  }
}

bool MemoryLink::Send(std::size_t route, std::span<const std::uint8_t> datagram) {
  queues_.at(route)->Push(std::vector<std::uint8_t>(datagram.begin(), datagram.end()));
  return true;
}

namespace {

class MemorySource : public DatagramSource {
 public:
  explicit MemorySource(Mailbox<std::vector<std::uint8_t>>& queue) : queue_(queue) {}
  std::optional<std::size_t> Receive(std::span<std::uint8_t> buf,
                                     std::chrono::milliseconds timeout) override {
    auto item = queue_.PopFor(timeout);
    if (!item) return std::nullopt;
    const std::size_t n = std::min(buf.size(), item->size());
    std::copy_n(item->begin(), n, buf.begin());
    return n;
  }

 private:
  Mailbox<std::vector<std::uint8_t>>& queue_;
};

}  // namespace

std::unique_ptr<DatagramSource> MemoryLink::Source(std::size_t route) {
  return std::make_unique<MemorySource>(*queues_.at(route));
}

}  // namespace rapro
