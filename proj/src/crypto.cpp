#include "saz/crypto.hpp"

#include <openssl/crypto.h>
#include <openssl/evp.h>
#include <openssl/hmac.h>
#include <openssl/kdf.h>
#include <openssl/rand.h>

#include <memory>

#include "saz/error.hpp"

namespace saz {
namespace {

struct PkeyDeleter {
  void operator()(EVP_PKEY* p) const { EVP_PKEY_free(p); }
};
struct PkeyCtxDeleter {
  void operator()(EVP_PKEY_CTX* p) const { EVP_PKEY_CTX_free(p); }
};
struct MdCtxDeleter {
  void operator()(EVP_MD_CTX* p) const { EVP_MD_CTX_free(p); }
};
using Pkey = std::unique_ptr<EVP_PKEY, PkeyDeleter>;
using PkeyCtx = std::unique_ptr<EVP_PKEY_CTX, PkeyCtxDeleter>;
using MdCtx = std::unique_ptr<EVP_MD_CTX, MdCtxDeleter>;

[[noreturn]] void crypto_failure(const char* what) {
  throw std::runtime_error(std::string("libcrypto failure: ") + what);
}

Pkey private_key(int type, const FixedBytes<32>& raw) {
  Pkey key(EVP_PKEY_new_raw_private_key(type, nullptr, raw.data(), raw.size()));
  if (!key) crypto_failure("EVP_PKEY_new_raw_private_key");
  return key;
}

PublicKey raw_public(const Pkey& key) {
  PublicKey out{};
  std::size_t len = out.size();
  if (EVP_PKEY_get_raw_public_key(key.get(), out.data(), &len) != 1 || len != out.size())
    crypto_failure("EVP_PKEY_get_raw_public_key");
  return out;
}

}  // namespace

std::uint64_t Rng::next_u64() {
  auto b = bytes<8>();
  std::uint64_t v = 0;
  for (auto c : b) v = (v << 8) | c;
  return v;
}

void SystemRng::fill(std::span<std::uint8_t> out) {
  if (out.empty()) return;
  if (RAND_bytes(out.data(), static_cast<int>(out.size())) != 1) crypto_failure("RAND_bytes");
}

void SeededRng::fill(std::span<std::uint8_t> out) {
  for (auto& b : out) b = static_cast<std::uint8_t>(engine_() >> 56);
}

Digest sha256(ByteView data) {
  Digest out{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) != 1)
    crypto_failure("EVP_Digest");
  return out;
}

MacTag hmac_sha256(ByteView key, ByteView data) {
  MacTag out{};
  unsigned int len = 0;
  if (!HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()), data.data(), data.size(),
            out.data(), &len))
    crypto_failure("HMAC");
  return out;
}

bool mac_equal(ByteView a, ByteView b) {
  return a.size() == b.size() && CRYPTO_memcmp(a.data(), b.data(), a.size()) == 0;
}

Bytes hkdf_sha256(ByteView ikm, ByteView salt, ByteView info, std::size_t length) {
  PkeyCtx ctx(EVP_PKEY_CTX_new_id(EVP_PKEY_HKDF, nullptr));
  if (!ctx || EVP_PKEY_derive_init(ctx.get()) != 1 ||
      EVP_PKEY_CTX_set_hkdf_md(ctx.get(), EVP_sha256()) != 1 ||
      EVP_PKEY_CTX_set1_hkdf_salt(ctx.get(), salt.data(), static_cast<int>(salt.size())) != 1 ||
      EVP_PKEY_CTX_set1_hkdf_key(ctx.get(), ikm.data(), static_cast<int>(ikm.size())) != 1 ||
      EVP_PKEY_CTX_add1_hkdf_info(ctx.get(), info.data(), static_cast<int>(info.size())) != 1)
    crypto_failure("HKDF setup");
  Bytes out(length);
  std::size_t len = length;
  if (EVP_PKEY_derive(ctx.get(), out.data(), &len) != 1 || len != length)
    crypto_failure("HKDF derive");
  return out;
}

KeyPair KeyPair::generate(Rng& rng) { return from_seed(rng.bytes<32>()); }

KeyPair KeyPair::from_seed(const FixedBytes<32>& seed) {
  return KeyPair(seed, raw_public(private_key(EVP_PKEY_ED25519, seed)));
}

Signature KeyPair::sign(ByteView message) const {
  auto key = private_key(EVP_PKEY_ED25519, seed_);
  MdCtx ctx(EVP_MD_CTX_new());
  Signature sig{};
  std::size_t len = sig.size();
  if (!ctx || EVP_DigestSignInit(ctx.get(), nullptr, nullptr, nullptr, key.get()) != 1 ||
      EVP_DigestSign(ctx.get(), sig.data(), &len, message.data(), message.size()) != 1 ||
      len != sig.size())
    crypto_failure("Ed25519 sign");
  return sig;
}

bool ed25519_verify(const PublicKey& key, ByteView message, ByteView signature) {
  if (signature.size() != 64) return false;
  Pkey pub(EVP_PKEY_new_raw_public_key(EVP_PKEY_ED25519, nullptr, key.data(), key.size()));
  if (!pub) return false;
  MdCtx ctx(EVP_MD_CTX_new());
  if (!ctx || EVP_DigestVerifyInit(ctx.get(), nullptr, nullptr, nullptr, pub.get()) != 1)
    crypto_failure("Ed25519 verify init");
  return EVP_DigestVerify(ctx.get(), signature.data(), signature.size(), message.data(),
                          message.size()) == 1;
}

EphemeralKey EphemeralKey::generate(Rng& rng) {
  auto priv = rng.bytes<32>();
  return EphemeralKey(priv, raw_public(private_key(EVP_PKEY_X25519, priv)));
}

FixedBytes<32> EphemeralKey::agree(const PublicKey& peer) const {
  auto mine = private_key(EVP_PKEY_X25519, private_);
  Pkey theirs(EVP_PKEY_new_raw_public_key(EVP_PKEY_X25519, nullptr, peer.data(), peer.size()));
  if (!theirs) throw Error(Errc::MalformedToken, "invalid X25519 public value");
  PkeyCtx ctx(EVP_PKEY_CTX_new(mine.get(), nullptr));
  if (!ctx || EVP_PKEY_derive_init(ctx.get()) != 1) crypto_failure("X25519 derive init");
  if (EVP_PKEY_derive_set_peer(ctx.get(), theirs.get()) != 1)
    throw Error(Errc::MalformedToken, "X25519 peer rejected");
  FixedBytes<32> shared{};
  std::size_t len = shared.size();
  if (EVP_PKEY_derive(ctx.get(), shared.data(), &len) != 1 || len != shared.size())
    throw Error(Errc::MalformedToken, "X25519 agreement failed (low-order point)");
  return shared;
}

}  // namespace saz
