#pragma once

// Canonical encoding primitives: big-endian fixed-width integers, byte strings and
// lists prefixed by a 32-bit big-endian count. Decoding throws Error(Malformed).

#include <cstdint>
#include <string>
#include <string_view>

#include "saz/bytes.hpp"

namespace saz {

class Writer {
 public:
  Writer& u8(std::uint8_t v);
  Writer& u32(std::uint32_t v);
  Writer& u64(std::uint64_t v);
  Writer& i64(std::int64_t v) { return u64(static_cast<std::uint64_t>(v)); }
  Writer& bytes(ByteView b);
  Writer& str(std::string_view s) { return bytes(as_bytes(s)); }
  Writer& raw(ByteView b);

  const Bytes& data() const& noexcept { return out_; }
  Bytes take() && { return std::move(out_); }

 private:
  Bytes out_;
};

class Reader {
 public:
  explicit Reader(ByteView in) : in_(in) {}

  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  Bytes bytes();
  std::string str();
  template <std::size_t N>
  FixedBytes<N> fixed() {
    auto b = bytes();
    check(b.size() == N, "fixed-size field has wrong length");
    FixedBytes<N> out{};
    std::copy(b.begin(), b.end(), out.begin());
    return out;
  }
  /// List count, bounded by remaining input so hostile counts cannot force allocation.
  std::uint32_t count();

  bool done() const noexcept { return pos_ == in_.size(); }
  std::size_t position() const noexcept { return pos_; }
  /// Throws Malformed unless all input was consumed.
  void finish() const;

  static void check(bool ok, const char* what);

 private:
  ByteView take(std::size_t n);
  ByteView in_;
  std::size_t pos_ = 0;
};

}  // namespace saz

namespace saz::tag {
inline constexpr std::uint8_t Certificate = 0x01;
inline constexpr std::uint8_t ClientHello = 0x10;
inline constexpr std::uint8_t ServerAuth = 0x11;
inline constexpr std::uint8_t ClientAuth = 0x12;
inline constexpr std::uint8_t Protected = 0x20;
inline constexpr std::uint8_t OperationRequest = 0x21;
inline constexpr std::uint8_t Decision = 0x22;
inline constexpr std::uint8_t DelegationRequest = 0x30;
inline constexpr std::uint8_t DelegationResponse = 0x31;
}  // namespace saz::tag
