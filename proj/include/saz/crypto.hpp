#pragma once

// Thin wrappers over libcrypto for the fixed SAZ-v1 suite:
// Ed25519 identities, X25519 ephemeral DH, SHA-256, HMAC-SHA-256, HKDF-SHA-256.

#include <cstdint>
#include <random>
#include <string_view>

#include "saz/bytes.hpp"

namespace saz {

struct Suite {
  static constexpr std::string_view name = "SAZ-v1";
  static constexpr std::string_view signature = "Ed25519";
  static constexpr std::string_view key_exchange = "X25519";
  static constexpr std::string_view hash = "SHA-256";
  static constexpr std::string_view kdf = "HKDF-SHA-256";
  static constexpr std::string_view mac = "HMAC-SHA-256";
};

using Digest = FixedBytes<32>;
using MacTag = FixedBytes<32>;
using PublicKey = FixedBytes<32>;
using Signature = FixedBytes<64>;

class Rng {
 public:
  virtual ~Rng() = default;
  virtual void fill(std::span<std::uint8_t> out) = 0;

  template <std::size_t N>
  FixedBytes<N> bytes() {
    FixedBytes<N> out{};
    fill(out);
    return out;
  }

  std::uint64_t next_u64();
};

/// OS-backed CSPRNG; thread-safe.
class SystemRng final : public Rng {
 public:
  void fill(std::span<std::uint8_t> out) override;
};

/// Reproducible stream for tests and conformance vectors. Not for production keys.
class SeededRng final : public Rng {
 public:
  explicit SeededRng(std::uint64_t seed) : engine_(seed) {}
  void fill(std::span<std::uint8_t> out) override;

 private:
  std::mt19937_64 engine_;
};

Digest sha256(ByteView data);
MacTag hmac_sha256(ByteView key, ByteView data);
bool mac_equal(ByteView a, ByteView b);
Bytes hkdf_sha256(ByteView ikm, ByteView salt, ByteView info, std::size_t length);

/// Ed25519 signing identity, held as its 32-byte seed.
class KeyPair {
 public:
  static KeyPair generate(Rng& rng);
  static KeyPair from_seed(const FixedBytes<32>& seed);

  const PublicKey& verifying_key() const noexcept { return public_; }
  const FixedBytes<32>& seed() const noexcept { return seed_; }
  Signature sign(ByteView message) const;

  friend bool operator==(const KeyPair&, const KeyPair&) = default;

 private:
  KeyPair(const FixedBytes<32>& seed, const PublicKey& pub) : seed_(seed), public_(pub) {}
  FixedBytes<32> seed_;
  PublicKey public_;
};

bool ed25519_verify(const PublicKey& key, ByteView message, ByteView signature);

/// X25519 ephemeral key, used for exactly one handshake.
class EphemeralKey {
 public:
  static EphemeralKey generate(Rng& rng);

  const PublicKey& public_key() const noexcept { return public_; }
  /// Throws Error(MalformedToken) for low-order peer points (all-zero shared secret).
  FixedBytes<32> agree(const PublicKey& peer) const;

 private:
  EphemeralKey(const FixedBytes<32>& priv, const PublicKey& pub) : private_(priv), public_(pub) {}
  FixedBytes<32> private_;
  PublicKey public_;
};

}  // namespace saz
