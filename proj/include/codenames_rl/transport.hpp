#pragma once

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstring>
#include <functional>
#include <iostream>
#include <memory>
#include <string>
#include <thread>

#include "codenames_rl/error.hpp"
#include "codenames_rl/protocol.hpp"

namespace codenames_rl {

/// JSON-lines over a pair of streams (stdio mode). Returns when the input
/// ends or the session is closed.
inline void serve_stream(std::istream& in, std::ostream& out, std::shared_ptr<const ServerContext> ctx) {
  Session session(std::move(ctx));
  std::string line;
  while (!session.closed() && std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    out << session.handle_line(line) << '\n' << std::flush;
  }
}

namespace detail {

inline bool write_all(int fd, std::string_view data) {
  while (!data.empty()) {
    const ssize_t n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    data.remove_prefix(static_cast<std::size_t>(n));
  }
  return true;
}

inline void serve_connection(int fd, std::shared_ptr<const ServerContext> ctx) {
  Session session(std::move(ctx));
  std::string buffer;
  char chunk[4096];
  while (!session.closed()) {
    const ssize_t n = ::recv(fd, chunk, sizeof(chunk), 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    buffer.append(chunk, static_cast<std::size_t>(n));
    std::size_t nl;
    while (!session.closed() && (nl = buffer.find('\n')) != std::string::npos) {
      std::string line = buffer.substr(0, nl);
      buffer.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      if (!write_all(fd, session.handle_line(line) + "\n")) {
        ::close(fd);
        return;
      }
    }
  }
  ::close(fd);
}

}  // namespace detail

/// TCP listener; one thread and one independent session per connection.
/// `on_ready` receives the bound port (useful with port 0). Runs until
/// `stop` becomes true (checked between accepts) or accept fails.
inline void serve_tcp(const std::string& host, std::uint16_t port, std::shared_ptr<const ServerContext> ctx,
                      const std::function<void(std::uint16_t)>& on_ready = {},
                      const std::atomic<bool>* stop = nullptr) {
  const int listener = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listener < 0) throw Error("transport", std::string("socket: ") + std::strerror(errno));
  const int yes = 1;
  ::setsockopt(listener, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    ::close(listener);
    throw Error("transport", "invalid IPv4 host: " + host);
  }
  if (::bind(listener, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0 || ::listen(listener, 16) < 0) {
    const std::string msg = std::strerror(errno);
    ::close(listener);
    throw Error("transport", "bind/listen " + host + ":" + std::to_string(port) + ": " + msg);
  }
  socklen_t len = sizeof(addr);
  ::getsockname(listener, reinterpret_cast<sockaddr*>(&addr), &len);
  if (on_ready) on_ready(ntohs(addr.sin_port));
  while (!(stop && stop->load())) {
    const int fd = ::accept(listener, nullptr, nullptr);
    if (fd < 0) {
      if (errno == EINTR) continue;
      break;
    }
    std::thread(detail::serve_connection, fd, ctx).detach();
  }
  ::close(listener);
}

}  // namespace codenames_rl
