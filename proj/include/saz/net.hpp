#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>

#include "saz/frame.hpp"

namespace saz {

struct Endpoint {
  std::string host;
  std::uint16_t port = 0;

  std::string to_string() const { return host + ":" + std::to_string(port); }
  friend bool operator==(const Endpoint&, const Endpoint&) = default;
};

/// "HOST:PORT"; throws InvalidArgument.
Endpoint parse_endpoint(std::string_view text);

/// Throws ConnectFailure or Timeout.
FdStream connect_tcp(const Endpoint& ep, std::chrono::milliseconds timeout,
                     std::chrono::milliseconds io_timeout);

class Listener {
 public:
  /// Binds with SO_REUSEADDR; port 0 picks an ephemeral port. Throws BindFailure.
  explicit Listener(const Endpoint& ep, int backlog = 128);
  ~Listener();
  Listener(const Listener&) = delete;
  Listener& operator=(const Listener&) = delete;

  Endpoint local_endpoint() const;
  /// Waits up to `wait` for a connection; returns -1 if none arrived.
  int accept_fd(std::chrono::milliseconds wait);
  void close();

 private:
  int fd_ = -1;
  std::string host_;
};

}  // namespace saz
