#pragma once

// Three-token mutual authentication (ClientHello, ServerAuth, ClientAuth) followed by a
// MAC-protected channel. Each side signs the transcript hash with its leaf identity key;
// session keys come from ephemeral X25519 through HKDF. Integrity only, no confidentiality.

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "saz/credential.hpp"
#include "saz/messages.hpp"

namespace saz {

inline constexpr std::string_view kKdfInfo = "SAZ-v1";
inline constexpr std::size_t kKeyBlockSize = 64;

/// Running SHA-256 transcript over canonical token encodings.
class Transcript {
 public:
  void absorb(ByteView encoded) { append(bytes_, encoded); }
  Digest hash() const { return sha256(bytes_); }
  /// Hash of the current transcript followed by `extra`, without absorbing it.
  Digest hash_with(ByteView extra) const;

 private:
  Bytes bytes_;
};

enum class Role { Initiator, Acceptor };

class SecurityContext {
 public:
  SecurityContext(Role role, const FixedBytes<64>& key_block, VerifiedIdentity peer,
                  Digest transcript_hash, std::vector<Certificate> peer_chain = {});

  Role role() const noexcept { return role_; }
  const MacTag& send_key() const noexcept { return send_key_; }
  const MacTag& recv_key() const noexcept { return recv_key_; }
  std::uint64_t send_seq() const noexcept { return send_seq_; }
  std::uint64_t recv_seq() const noexcept { return recv_seq_; }
  const VerifiedIdentity& peer() const noexcept { return peer_; }
  const Digest& transcript_hash() const noexcept { return transcript_hash_; }
  /// Chain the peer presented during the handshake.
  const std::vector<Certificate>& peer_chain() const noexcept { return peer_chain_; }

  ProtectedMessage wrap(ByteView body);
  /// Throws IntegrityFailure on a bad MAC (tampering, reordering or replay).
  Bytes unwrap(const ProtectedMessage& msg);

 private:
  Role role_;
  MacTag send_key_{};
  MacTag recv_key_{};
  std::uint64_t send_seq_ = 0;
  std::uint64_t recv_seq_ = 0;
  VerifiedIdentity peer_;
  Digest transcript_hash_{};
  std::vector<Certificate> peer_chain_;
};

MacTag channel_mac(const MacTag& key, std::uint64_t seq, ByteView body);

struct PendingInitiator {
  CredentialChain chain;
  EphemeralKey eph;
  ClientHello hello;
  Transcript transcript;
};

struct PendingAcceptor {
  ClientHello hello;
  VerifiedIdentity client;
  FixedBytes<64> key_block{};
  Transcript transcript;  // C1 || S1
};

std::pair<ClientHello, PendingInitiator> initiate(const CredentialChain& chain, Rng& rng);

/// Throws UnsupportedVersion, BadClientChain (cause = verify_chain code), MalformedToken.
std::pair<ServerAuth, PendingAcceptor> respond(const ClientHello& hello,
                                               const CredentialChain& server_chain,
                                               std::span<const Certificate> trust_anchors,
                                               UtcTime now, Rng& rng);

/// Throws BadServerChain, BadServerSignature, MalformedToken.
std::pair<ClientAuth, SecurityContext> finish_initiate(PendingInitiator pending,
                                                       const ServerAuth& auth,
                                                       std::span<const Certificate> trust_anchors,
                                                       UtcTime now);

/// Throws BadClientSignature.
SecurityContext finish_accept(PendingAcceptor pending, const ClientAuth& auth);

FixedBytes<64> derive_key_block(const FixedBytes<32>& shared, const FixedBytes<16>& client_nonce,
                                const FixedBytes<16>& server_nonce);

// Optional delegation, run inside an established context.

/// Server side: fresh key for the delegated proxy. The private half stays with the caller.
KeyPair delegate_request(Rng& rng);

/// Client side: proxy certificate over `server_pub`, signed by the client leaf key.
Certificate delegate_fulfill(const CredentialChain& chain, const PublicKey& server_pub,
                             std::uint32_t lifetime_seconds, UtcTime now, Rng& rng);

/// Server side: checks the delegated certificate extends the chain the client authenticated
/// with. Throws BadDelegation.
CredentialChain accept_delegation(const SecurityContext& ctx, const KeyPair& delegate_key,
                                  const Certificate& delegated,
                                  std::span<const Certificate> trust_anchors, UtcTime now);

}  // namespace saz

#include "saz/frame.hpp"

namespace saz {

/// One canonical message per frame.
void send_token(Stream& s, const Message& msg);
/// Throws Closed at end of stream, MalformedToken if the frame is not a T.
template <class T>
T receive_token(Stream& s) {
  auto frame = read_frame(s);
  if (!frame) throw Error(Errc::Closed, "peer closed during handshake");
  try {
    return decode_as<T>(*frame);
  } catch (const Error& e) {
    throw Error(Errc::MalformedToken, e.what(), e.code());
  }
}

void send_protected(Stream& s, SecurityContext& ctx, const Message& msg);
/// Unwrapped body of the next protected frame. Throws Closed at end of stream and
/// IntegrityFailure for any frame that is not an intact ProtectedMessage.
Bytes receive_protected(Stream& s, SecurityContext& ctx);

}  // namespace saz
