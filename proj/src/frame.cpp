#include "saz/frame.hpp"

#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>

#include "saz/error.hpp"

namespace saz {

std::size_t MemoryStream::read_some(std::span<std::uint8_t> out) {
  auto n = std::min(out.size(), remaining());
  std::copy_n(input_.begin() + static_cast<std::ptrdiff_t>(pos_), n, out.begin());
  pos_ += n;
  return n;
}

FdStream::FdStream(int fd, std::chrono::milliseconds io_timeout)
    : fd_(fd), io_timeout_(io_timeout) {}

FdStream::~FdStream() { close(); }

FdStream::FdStream(FdStream&& other) noexcept
    : fd_(std::exchange(other.fd_, -1)), io_timeout_(other.io_timeout_), deadline_(other.deadline_) {}

FdStream& FdStream::operator=(FdStream&& other) noexcept {
  if (this != &other) {
    close();
    fd_ = std::exchange(other.fd_, -1);
    io_timeout_ = other.io_timeout_;
    deadline_ = other.deadline_;
  }
  return *this;
}

void FdStream::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

void FdStream::wait(short events) {
  using namespace std::chrono;
  auto limit = steady_clock::now() + io_timeout_;
  if (deadline_) limit = std::min(limit, *deadline_);
  while (true) {
    auto left = duration_cast<milliseconds>(limit - steady_clock::now()).count();
    if (left <= 0) throw Error(Errc::Timeout, "no progress within deadline");
    pollfd p{fd_, events, 0};
    int rc = ::poll(&p, 1, static_cast<int>(left));
    if (rc > 0) return;
    if (rc == 0) throw Error(Errc::Timeout, "no progress within deadline");
    if (errno != EINTR) throw Error(Errc::Io, std::string("poll: ") + std::strerror(errno));
  }
}

void FdStream::write_all(ByteView data) {
  if (fd_ < 0) throw Error(Errc::Closed, "stream closed");
  std::size_t off = 0;
  while (off < data.size()) {
    wait(POLLOUT);
    auto n = ::send(fd_, data.data() + off, data.size() - off, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      if (errno == EPIPE || errno == ECONNRESET) throw Error(Errc::Closed, "peer closed");
      throw Error(Errc::Io, std::string("send: ") + std::strerror(errno));
    }
    off += static_cast<std::size_t>(n);
  }
}

std::size_t FdStream::read_some(std::span<std::uint8_t> out) {
  if (fd_ < 0) throw Error(Errc::Closed, "stream closed");
  while (true) {
    wait(POLLIN);
    auto n = ::recv(fd_, out.data(), out.size(), 0);
    if (n >= 0) return static_cast<std::size_t>(n);
    if (errno == EINTR || errno == EAGAIN) continue;
    if (errno == ECONNRESET) return 0;
    throw Error(Errc::Io, std::string("recv: ") + std::strerror(errno));
  }
}

namespace {

void check_length(std::size_t n) {
  if (n == 0) throw Error(Errc::ZeroLength, "empty frame");
  if (n > kMaxFrame) throw Error(Errc::Oversize, "frame of " + std::to_string(n) + " bytes");
}

// Fills `out` completely; returns bytes read before end of stream.
std::size_t read_exact(Stream& s, std::span<std::uint8_t> out) {
  std::size_t got = 0;
  while (got < out.size()) {
    auto n = s.read_some(out.subspan(got));
    if (n == 0) break;
    got += n;
  }
  return got;
}

}  // namespace

Bytes encode_frame(ByteView payload) {
  check_length(payload.size());
  Bytes out;
  out.reserve(payload.size() + 4);
  auto n = static_cast<std::uint32_t>(payload.size());
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(n >> shift));
  append(out, payload);
  return out;
}

void write_frame(Stream& s, ByteView payload) { s.write_all(encode_frame(payload)); }

std::optional<Bytes> read_frame(Stream& s) {
  FixedBytes<4> header{};
  auto got = read_exact(s, header);
  if (got == 0) return std::nullopt;
  if (got < header.size()) throw Error(Errc::Truncated, "frame header cut short");
  std::uint32_t len = 0;
  for (auto b : header) len = (len << 8) | b;
  check_length(len);
  Bytes payload(len);
  if (read_exact(s, payload) != len) throw Error(Errc::Truncated, "frame payload cut short");
  return payload;
}

Bytes decode_frame(ByteView wire) {
  MemoryStream s(Bytes(wire.begin(), wire.end()));
  auto payload = read_frame(s);
  if (!payload) throw Error(Errc::Truncated, "no frame");
  if (s.remaining() != 0) throw Error(Errc::Malformed, "bytes after frame");
  return *payload;
}

}  // namespace saz
