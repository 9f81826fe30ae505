#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>

#include "saz/bytes.hpp"

namespace saz {

inline constexpr std::size_t kMaxFrame = 1u << 20;

/// Byte stream a connection runs over. read_some returns 0 at end of stream.
class Stream {
 public:
  virtual ~Stream() = default;
  virtual void write_all(ByteView data) = 0;
  virtual std::size_t read_some(std::span<std::uint8_t> out) = 0;
  /// Half-close or close; further writes fail.
  virtual void close() {}
};

/// In-memory stream: reads drain `input`, writes accumulate in `output`.
class MemoryStream final : public Stream {
 public:
  MemoryStream() = default;
  explicit MemoryStream(Bytes input) : input_(std::move(input)) {}

  void write_all(ByteView data) override { append(output_, data); }
  std::size_t read_some(std::span<std::uint8_t> out) override;

  const Bytes& output() const noexcept { return output_; }
  std::size_t remaining() const noexcept { return input_.size() - pos_; }

 private:
  Bytes input_;
  std::size_t pos_ = 0;
  Bytes output_;
};

/// Owns a socket descriptor. Each read/write waits at most `io_timeout` for progress and never
/// past `deadline` if one is set; both raise Error(Timeout).
class FdStream final : public Stream {
 public:
  explicit FdStream(int fd, std::chrono::milliseconds io_timeout = std::chrono::seconds{10});
  ~FdStream() override;
  FdStream(const FdStream&) = delete;
  FdStream& operator=(const FdStream&) = delete;
  FdStream(FdStream&& other) noexcept;
  FdStream& operator=(FdStream&& other) noexcept;

  void set_deadline(std::chrono::steady_clock::time_point deadline) { deadline_ = deadline; }

  void write_all(ByteView data) override;
  std::size_t read_some(std::span<std::uint8_t> out) override;
  void close() override;
  int fd() const noexcept { return fd_; }

 private:
  void wait(short events);
  int fd_ = -1;
  std::chrono::milliseconds io_timeout_;
  std::optional<std::chrono::steady_clock::time_point> deadline_;
};

/// 4-byte big-endian length, then payload. Throws ZeroLength/Oversize.
Bytes encode_frame(ByteView payload);
void write_frame(Stream& s, ByteView payload);
/// nullopt on clean end of stream at a frame boundary; Truncated if it ends mid-frame.
std::optional<Bytes> read_frame(Stream& s);
/// Decodes exactly one frame occupying all of `wire`.
Bytes decode_frame(ByteView wire);

}  // namespace saz
