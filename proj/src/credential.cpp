#include "saz/credential.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <iterator>

#include "saz/error.hpp"

namespace saz {
namespace {

constexpr std::string_view kChainMagic = "SAZC";
constexpr std::string_view kKeyMagic = "SAZK";
constexpr std::uint8_t kFileVersion = 1;

void put_fields(Writer& w, const Certificate& c) {
  w.u8(tag::Certificate);
  put_dn(w, c.subject);
  put_dn(w, c.issuer);
  w.u64(c.serial);
  w.i64(c.not_before.time_since_epoch().count());
  w.i64(c.not_after.time_since_epoch().count());
  w.bytes(c.subject_key);
}

bool signed_by(const Certificate& cert, const PublicKey& key) {
  return ed25519_verify(key, encode_tbs(cert), cert.signature);
}

std::vector<Certificate> decode_with_magic(ByteView in, std::string_view magic) {
  Reader r(in);
  for (char m : magic) {
    if (r.u8() != static_cast<std::uint8_t>(m)) throw Error(Errc::Malformed, "bad magic");
  }
  if (r.u8() != kFileVersion) throw Error(Errc::Malformed, "unsupported file version");
  auto chain = get_chain(r);
  r.finish();
  return chain;
}

}  // namespace

void put_dn(Writer& w, const DistinguishedName& dn) {
  w.u32(static_cast<std::uint32_t>(dn.size()));
  for (const auto& c : dn.components()) w.str(c.attribute).str(c.value);
}

DistinguishedName get_dn(Reader& r) {
  auto n = r.count();
  std::vector<DnComponent> comps;
  comps.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    auto attr = r.str();
    auto value = r.str();
    comps.push_back({std::move(attr), std::move(value)});
  }
  try {
    return DistinguishedName(std::move(comps));
  } catch (const Error& e) {
    throw Error(Errc::Malformed, e.what());
  }
}

Bytes encode_tbs(const Certificate& cert) {
  Writer w;
  put_fields(w, cert);
  return std::move(w).take();
}

void put_certificate(Writer& w, const Certificate& cert) {
  put_fields(w, cert);
  w.bytes(cert.signature);
}

Certificate get_certificate(Reader& r) {
  if (r.u8() != tag::Certificate) throw Error(Errc::Malformed, "expected certificate tag");
  auto subject = get_dn(r);
  auto issuer = get_dn(r);
  auto serial = r.u64();
  UtcTime nb{std::chrono::seconds{r.i64()}};
  UtcTime na{std::chrono::seconds{r.i64()}};
  auto key = r.fixed<32>();
  auto sig = r.bytes();
  return Certificate{std::move(subject), std::move(issuer), serial, nb, na, key, std::move(sig)};
}

Bytes encode_certificate(const Certificate& cert) {
  Writer w;
  put_certificate(w, cert);
  return std::move(w).take();
}

Certificate decode_certificate(ByteView in) {
  Reader r(in);
  auto c = get_certificate(r);
  r.finish();
  return c;
}

void put_chain(Writer& w, std::span<const Certificate> certs) {
  w.u32(static_cast<std::uint32_t>(certs.size()));
  for (const auto& c : certs) put_certificate(w, c);
}

std::vector<Certificate> get_chain(Reader& r) {
  auto n = r.count();
  std::vector<Certificate> out;
  out.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) out.push_back(get_certificate(r));
  return out;
}

Certificate issue_certificate(const KeyPair& issuer_key,
                              const std::optional<DistinguishedName>& issuer_subject,
                              const DistinguishedName& subject, const PublicKey& subject_key,
                              Validity validity, std::uint64_t serial) {
  if (!(validity.not_before < validity.not_after))
    throw Error(Errc::InvalidValidity, "not_before must precede not_after");
  Certificate cert{subject, issuer_subject.value_or(subject), serial, validity.not_before,
                   validity.not_after, subject_key, {}};
  auto sig = issuer_key.sign(encode_tbs(cert));
  cert.signature.assign(sig.begin(), sig.end());
  return cert;
}

Certificate issue_proxy_certificate(const CredentialChain& chain, const PublicKey& subject_key,
                                    std::uint32_t lifetime_seconds, UtcTime now, Rng& rng) {
  const auto& parent = chain.leaf();
  if (lifetime_seconds == 0) throw Error(Errc::InvalidValidity, "proxy lifetime must be positive");
  if (now >= parent.not_after) throw Error(Errc::ExpiredChain, "parent certificate expired");
  auto not_after = std::min(now + std::chrono::seconds{lifetime_seconds}, parent.not_after);
  return issue_certificate(chain.leaf_key, parent.subject, parent.subject.with_proxy(),
                           subject_key, {now, not_after}, rng.next_u64());
}

CredentialChain create_proxy(const CredentialChain& chain, std::uint32_t lifetime_seconds,
                             UtcTime now, Rng& rng) {
  auto key = KeyPair::generate(rng);
  auto proxy = issue_proxy_certificate(chain, key.verifying_key(), lifetime_seconds, now, rng);
  CredentialChain out{{std::move(proxy)}, key};
  out.certs.insert(out.certs.end(), chain.certs.begin(), chain.certs.end());
  return out;
}

VerifiedIdentity verify_chain(std::span<const Certificate> chain,
                              std::span<const Certificate> trust_anchors, UtcTime now) {
  if (chain.empty()) throw Error(Errc::BrokenLinkage, "empty chain");
  const std::size_t n = chain.size();

  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (chain[i].issuer != chain[i + 1].subject)
      throw Error(Errc::BrokenLinkage, "issuer of certificate " + std::to_string(i) +
                                           " does not match next subject");
    if (!signed_by(chain[i], chain[i + 1].subject_key))
      throw Error(Errc::BadSignature, "certificate " + std::to_string(i));
  }
  const auto& root = chain.back();
  if (!root.self_signed()) throw Error(Errc::BrokenLinkage, "chain does not end in a CA");
  if (!signed_by(root, root.subject_key)) throw Error(Errc::BadSignature, "CA self-signature");
  bool trusted = std::any_of(trust_anchors.begin(), trust_anchors.end(),
                             [&](const Certificate& a) { return a == root; });
  if (!trusted) throw Error(Errc::UntrustedAnchor, serialize_dn(root.subject));

  // proxies lead; then at most one end-entity issued by the anchor
  bool seen_non_proxy = false;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const auto& c = chain[i];
    if (c.is_proxy()) {
      if (seen_non_proxy) throw Error(Errc::MalformedProxy, "proxy after end-entity certificate");
      continue;
    }
    if (c.subject.ends_with_proxy())
      throw Error(Errc::MalformedProxy, "proxy subject does not extend its issuer");
    if (i + 2 != n)
      throw Error(Errc::BrokenLinkage, "end-entity certificate not issued by the trust anchor");
    seen_non_proxy = true;
  }

  UtcTime expires = UtcTime::max();
  for (const auto& c : chain) {
    if (now < c.not_before) throw Error(Errc::NotYetValid, serialize_dn(c.subject));
    if (now >= c.not_after) throw Error(Errc::Expired, serialize_dn(c.subject));
    expires = std::min(expires, c.not_after);
  }

  const auto& leaf = chain.front();
  return VerifiedIdentity{extract_base_dn(leaf.subject), leaf.subject, leaf.subject_key, expires};
}

Bytes encode_chain_file(std::span<const Certificate> certs) {
  Writer w;
  w.raw(as_bytes(kChainMagic)).u8(kFileVersion);
  put_chain(w, certs);
  return std::move(w).take();
}

std::vector<Certificate> decode_chain_file(ByteView in) {
  try {
    return decode_with_magic(in, kChainMagic);
  } catch (const Error& e) {
    throw Error(Errc::MalformedCredentialFile, e.what());
  }
}

Bytes encode_key_file(const KeyPair& key) {
  Writer w;
  w.raw(as_bytes(kKeyMagic)).u8(kFileVersion).raw(key.seed()).raw(key.verifying_key());
  return std::move(w).take();
}

KeyPair decode_key_file(ByteView in) {
  const std::size_t expected = kKeyMagic.size() + 1 + 64;
  if (in.size() != expected || to_string(in.first(4)) != kKeyMagic || in[4] != kFileVersion)
    throw Error(Errc::MalformedCredentialFile, "bad key file");
  FixedBytes<32> seed{};
  std::copy_n(in.begin() + 5, 32, seed.begin());
  auto key = KeyPair::from_seed(seed);
  if (!std::equal(key.verifying_key().begin(), key.verifying_key().end(), in.begin() + 37))
    throw Error(Errc::MalformedCredentialFile, "key file public key mismatch");
  return key;
}

std::filesystem::path key_path_for(const std::filesystem::path& chain_path) {
  auto p = chain_path;
  p += ".key";
  return p;
}

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot read " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, ByteView data, bool private_mode) {
  int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC,
                  private_mode ? 0600 : 0644);
  if (fd < 0) throw Error(Errc::Io, "cannot write " + path.string() + ": " + std::strerror(errno));
  std::size_t off = 0;
  while (off < data.size()) {
    auto n = ::write(fd, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      ::close(fd);
      throw Error(Errc::Io, "write failed for " + path.string());
    }
    off += static_cast<std::size_t>(n);
  }
  ::close(fd);
}

std::vector<Certificate> read_chain_file(const std::filesystem::path& path) {
  return decode_chain_file(read_file(path));
}

void write_chain_file(const std::filesystem::path& path, std::span<const Certificate> certs) {
  write_file(path, encode_chain_file(certs));
}

KeyPair read_key_file(const std::filesystem::path& path) { return decode_key_file(read_file(path)); }

void write_key_file(const std::filesystem::path& path, const KeyPair& key) {
  write_file(path, encode_key_file(key), true);
}

CredentialChain load_credentials(const std::filesystem::path& chain_path,
                                 std::optional<std::filesystem::path> key_path) {
  auto certs = read_chain_file(chain_path);
  if (certs.empty()) throw Error(Errc::MalformedCredentialFile, "empty chain");
  auto key = read_key_file(key_path.value_or(key_path_for(chain_path)));
  if (key.verifying_key() != certs.front().subject_key)
    throw Error(Errc::MalformedCredentialFile, "key does not match leaf certificate");
  return CredentialChain{std::move(certs), key};
}

void save_credentials(const std::filesystem::path& chain_path, const CredentialChain& chain) {
  write_chain_file(chain_path, chain.certs);
  write_key_file(key_path_for(chain_path), chain.leaf_key);
}

}  // namespace saz
