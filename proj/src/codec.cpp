#include "saz/codec.hpp"

#include "saz/error.hpp"

namespace saz {

Writer& Writer::u8(std::uint8_t v) {
  out_.push_back(v);
  return *this;
}

Writer& Writer::u32(std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out_.push_back(static_cast<std::uint8_t>(v >> shift));
  return *this;
}

Writer& Writer::u64(std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) out_.push_back(static_cast<std::uint8_t>(v >> shift));
  return *this;
}

Writer& Writer::bytes(ByteView b) {
  u32(static_cast<std::uint32_t>(b.size()));
  return raw(b);
}

Writer& Writer::raw(ByteView b) {
  append(out_, b);
  return *this;
}

void Reader::check(bool ok, const char* what) {
  if (!ok) throw Error(Errc::Malformed, what);
}

ByteView Reader::take(std::size_t n) {
  check(n <= in_.size() - pos_, "unexpected end of input");
  auto out = in_.subspan(pos_, n);
  pos_ += n;
  return out;
}

std::uint8_t Reader::u8() { return take(1)[0]; }

std::uint32_t Reader::u32() {
  std::uint32_t v = 0;
  for (auto b : take(4)) v = (v << 8) | b;
  return v;
}

std::uint64_t Reader::u64() {
  std::uint64_t v = 0;
  for (auto b : take(8)) v = (v << 8) | b;
  return v;
}

Bytes Reader::bytes() {
  auto n = u32();
  auto b = take(n);
  return {b.begin(), b.end()};
}

std::string Reader::str() { return to_string(bytes()); }

std::uint32_t Reader::count() {
  auto n = u32();
  // every list element occupies at least one byte
  check(n <= in_.size() - pos_, "list count exceeds input");
  return n;
}

void Reader::finish() const { check(done(), "trailing bytes"); }

}  // namespace saz
