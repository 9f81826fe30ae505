#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "saz/bytes.hpp"
#include "saz/codec.hpp"
#include "saz/crypto.hpp"
#include "saz/dn.hpp"
#include "saz/time.hpp"

namespace saz {

struct Certificate {
  DistinguishedName subject;
  DistinguishedName issuer;
  std::uint64_t serial = 0;
  UtcTime not_before;
  UtcTime not_after;
  PublicKey subject_key{};
  Bytes signature;

  bool self_signed() const { return subject == issuer; }
  /// Proxy iff subject == issuer + ("CN","proxy").
  bool is_proxy() const { return subject == issuer.with_proxy(); }

  friend bool operator==(const Certificate&, const Certificate&) = default;
};

/// Canonical encoding of every field but the signature; this is the signing input.
Bytes encode_tbs(const Certificate& cert);
Bytes encode_certificate(const Certificate& cert);
Certificate decode_certificate(ByteView in);

void put_certificate(Writer& w, const Certificate& cert);
Certificate get_certificate(Reader& r);
void put_chain(Writer& w, std::span<const Certificate> certs);
std::vector<Certificate> get_chain(Reader& r);
void put_dn(Writer& w, const DistinguishedName& dn);
DistinguishedName get_dn(Reader& r);

/// Leaf-first certificates plus the leaf's signing key.
struct CredentialChain {
  std::vector<Certificate> certs;
  KeyPair leaf_key;

  const Certificate& leaf() const { return certs.front(); }
  const Certificate& anchor() const { return certs.back(); }
};

struct VerifiedIdentity {
  DistinguishedName base_dn;
  DistinguishedName leaf_dn;
  PublicKey leaf_key{};
  UtcTime expires_at;

  friend bool operator==(const VerifiedIdentity&, const VerifiedIdentity&) = default;
};

struct Validity {
  UtcTime not_before;
  UtcTime not_after;
};

/// `issuer_subject` empty means self-signed: issuer = subject.
Certificate issue_certificate(const KeyPair& issuer_key,
                              const std::optional<DistinguishedName>& issuer_subject,
                              const DistinguishedName& subject, const PublicKey& subject_key,
                              Validity validity, std::uint64_t serial);

/// New chain with a fresh key and one more leading proxy certificate, clipped to the parent's
/// not_after. Throws ExpiredChain if the current leaf is expired at `now`.
CredentialChain create_proxy(const CredentialChain& chain, std::uint32_t lifetime_seconds,
                             UtcTime now, Rng& rng);

/// Proxy certificate for an externally held key (delegation).
Certificate issue_proxy_certificate(const CredentialChain& chain, const PublicKey& subject_key,
                                    std::uint32_t lifetime_seconds, UtcTime now, Rng& rng);

VerifiedIdentity verify_chain(std::span<const Certificate> chain,
                              std::span<const Certificate> trust_anchors, UtcTime now);

// Files: "SAZC" 0x01 <chain>  and  "SAZK" 0x01 <seed:32> <public:32>.
Bytes encode_chain_file(std::span<const Certificate> certs);
std::vector<Certificate> decode_chain_file(ByteView in);
Bytes encode_key_file(const KeyPair& key);
KeyPair decode_key_file(ByteView in);

std::filesystem::path key_path_for(const std::filesystem::path& chain_path);
std::vector<Certificate> read_chain_file(const std::filesystem::path& path);
void write_chain_file(const std::filesystem::path& path, std::span<const Certificate> certs);
KeyPair read_key_file(const std::filesystem::path& path);
void write_key_file(const std::filesystem::path& path, const KeyPair& key);
/// Chain at `chain_path`, key at `key_path` (default: chain_path + ".key").
CredentialChain load_credentials(const std::filesystem::path& chain_path,
                                 std::optional<std::filesystem::path> key_path = std::nullopt);
void save_credentials(const std::filesystem::path& chain_path, const CredentialChain& chain);

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, ByteView data, bool private_mode = false);

}  // namespace saz
