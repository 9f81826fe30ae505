#pragma once

// Test-only helpers: deterministic PKI fixtures, scripted randomness, temp directories,
// and in-process server plumbing over socketpairs.

#include <sys/socket.h>

#include <atomic>
#include <deque>
#include <filesystem>
#include <random>
#include <string>
#include <thread>

#include "saz/credential.hpp"
#include "saz/crypto.hpp"
#include "saz/frame.hpp"

namespace saz::testing {

inline Bytes from_hex(std::string_view hex) {
  Bytes out;
  for (std::size_t i = 0; i + 1 < hex.size(); i += 2)
    out.push_back(static_cast<std::uint8_t>(std::stoi(std::string(hex.substr(i, 2)), nullptr, 16)));
  return out;
}

/// Emits queued byte strings first, then falls back to a seeded stream.
class ScriptedRng final : public Rng {
 public:
  explicit ScriptedRng(std::uint64_t seed = 1) : fallback_(seed) {}
  void push(ByteView b) { queue_.insert(queue_.end(), b.begin(), b.end()); }
  void fill(std::span<std::uint8_t> out) override {
    for (auto& b : out) {
      if (!queue_.empty()) {
        b = queue_.front();
        queue_.pop_front();
      } else {
        fallback_.fill({&b, 1});
      }
    }
  }

 private:
  std::deque<std::uint8_t> queue_;
  SeededRng fallback_;
};

/// 2020-01-01 .. 2040-01-01: wide enough for any injected clock used in tests.
inline const UtcTime kEpochStart = make_utc(2020, 1, 1);
inline const UtcTime kEpochEnd = make_utc(2040, 1, 1);

struct TestCa {
  KeyPair key;
  Certificate cert;
  CredentialChain chain() const { return {{cert}, key}; }
  std::vector<Certificate> anchors() const { return {cert}; }
};

inline TestCa make_ca(const std::string& dn, Rng& rng, UtcTime nb = kEpochStart,
                      UtcTime na = kEpochEnd) {
  auto key = KeyPair::generate(rng);
  auto cert = issue_certificate(key, std::nullopt, parse_dn(dn), key.verifying_key(), {nb, na},
                                rng.next_u64());
  return {key, cert};
}

inline CredentialChain issue_user(const TestCa& ca, const std::string& dn, Rng& rng,
                                  UtcTime nb = kEpochStart, UtcTime na = kEpochEnd) {
  auto key = KeyPair::generate(rng);
  auto cert = issue_certificate(ca.key, ca.cert.subject, parse_dn(dn), key.verifying_key(),
                                {nb, na}, rng.next_u64());
  return {{cert, ca.cert}, key};
}

/// Chain with one proxy level, valid across the whole test epoch.
inline CredentialChain issue_proxy(const TestCa& ca, const std::string& dn, Rng& rng) {
  auto user = issue_user(ca, dn, rng);
  return create_proxy(user, 0xFFFFFFFFu, kEpochStart, rng);
}

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("saz-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++) + "-" +
             std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::pair<FdStream, FdStream> stream_pair(
    std::chrono::milliseconds io_timeout = std::chrono::seconds{5}) {
  int fds[2];
  if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, fds) != 0) throw std::runtime_error("socketpair");
  return {FdStream(fds[0], io_timeout), FdStream(fds[1], io_timeout)};
}

/// Forwards to an inner stream, recording writes and optionally flipping one bit of the
/// payload of the n-th frame written (frames are written with a single write_all).
class TamperStream final : public Stream {
 public:
  explicit TamperStream(Stream& inner) : inner_(inner) {}

  void flip_in_frame(std::size_t frame_index, std::size_t payload_bit) {
    target_frame_ = frame_index;
    target_bit_ = payload_bit;
  }

  void write_all(ByteView data) override {
    Bytes copy(data.begin(), data.end());
    if (frames_written_ == target_frame_ && copy.size() > 4) {
      auto bit = target_bit_ % ((copy.size() - 4) * 8);
      copy[4 + bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
    }
    ++frames_written_;
    append(written_, copy);
    inner_.write_all(copy);
  }
  std::size_t read_some(std::span<std::uint8_t> out) override { return inner_.read_some(out); }
  void close() override { inner_.close(); }

  const Bytes& written() const { return written_; }
  std::size_t frames_written() const { return frames_written_; }

 private:
  Stream& inner_;
  std::size_t frames_written_ = 0;
  std::size_t target_frame_ = static_cast<std::size_t>(-1);
  std::size_t target_bit_ = 0;
  Bytes written_;
};

/// Splits a byte capture into frame payloads.
inline std::vector<Bytes> split_frames(const Bytes& wire) {
  MemoryStream s(wire);
  std::vector<Bytes> out;
  while (auto f = read_frame(s)) out.push_back(std::move(*f));
  return out;
}

}  // namespace saz::testing
