#include "saz/handshake.hpp"

#include <algorithm>
#include <limits>

#include "saz/codec.hpp"
#include "saz/error.hpp"

namespace saz {
namespace {

template <class F>
auto rethrow_as(Errc code, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(code, e.what(), e.code());
  }
}

}  // namespace

Digest Transcript::hash_with(ByteView extra) const {
  Bytes all = bytes_;
  append(all, extra);
  return sha256(all);
}

SecurityContext::SecurityContext(Role role, const FixedBytes<64>& key_block, VerifiedIdentity peer,
                                 Digest transcript_hash, std::vector<Certificate> peer_chain)
    : role_(role),
      peer_(std::move(peer)),
      transcript_hash_(transcript_hash),
      peer_chain_(std::move(peer_chain)) {
  MacTag i2a{}, a2i{};
  std::copy_n(key_block.begin(), 32, i2a.begin());
  std::copy_n(key_block.begin() + 32, 32, a2i.begin());
  send_key_ = role == Role::Initiator ? i2a : a2i;
  recv_key_ = role == Role::Initiator ? a2i : i2a;
}

MacTag channel_mac(const MacTag& key, std::uint64_t seq, ByteView body) {
  Writer w;
  w.u64(seq).raw(body);
  return hmac_sha256(key, w.data());
}

ProtectedMessage SecurityContext::wrap(ByteView body) {
  if (send_seq_ == std::numeric_limits<std::uint64_t>::max())
    throw Error(Errc::InvalidArgument, "send sequence exhausted");
  ProtectedMessage msg{Bytes(body.begin(), body.end()), channel_mac(send_key_, send_seq_, body)};
  ++send_seq_;
  return msg;
}

Bytes SecurityContext::unwrap(const ProtectedMessage& msg) {
  auto expected = channel_mac(recv_key_, recv_seq_, msg.body);
  if (!mac_equal(expected, msg.mac))
    throw Error(Errc::IntegrityFailure, "MAC mismatch at sequence " + std::to_string(recv_seq_));
  ++recv_seq_;
  return msg.body;
}

FixedBytes<64> derive_key_block(const FixedBytes<32>& shared, const FixedBytes<16>& client_nonce,
                                const FixedBytes<16>& server_nonce) {
  Bytes salt(client_nonce.begin(), client_nonce.end());
  append(salt, server_nonce);
  auto okm = hkdf_sha256(shared, salt, as_bytes(kKdfInfo), kKeyBlockSize);
  FixedBytes<64> out{};
  std::copy(okm.begin(), okm.end(), out.begin());
  return out;
}

std::pair<ClientHello, PendingInitiator> initiate(const CredentialChain& chain, Rng& rng) {
  auto eph = EphemeralKey::generate(rng);
  ClientHello hello{kProtocolVersion, eph.public_key(), rng.bytes<16>(), chain.certs};
  Transcript transcript;
  transcript.absorb(encode_message(hello));
  return {hello, PendingInitiator{chain, eph, hello, std::move(transcript)}};
}

std::pair<ServerAuth, PendingAcceptor> respond(const ClientHello& hello,
                                               const CredentialChain& server_chain,
                                               std::span<const Certificate> trust_anchors,
                                               UtcTime now, Rng& rng) {
  if (hello.version != kProtocolVersion)
    throw Error(Errc::UnsupportedVersion, "version " + std::to_string(hello.version));
  auto client = rethrow_as(Errc::BadClientChain,
                           [&] { return verify_chain(hello.client_chain, trust_anchors, now); });

  auto eph = EphemeralKey::generate(rng);
  ServerAuth s1{eph.public_key(), rng.bytes<16>(), server_chain.certs, {}};
  auto key_block = derive_key_block(eph.agree(hello.client_eph_pub), hello.client_nonce,
                                    s1.server_nonce);

  Transcript transcript;
  transcript.absorb(encode_message(hello));
  auto sig = server_chain.leaf_key.sign(transcript.hash_with(encode_server_auth_unsigned(s1)));
  s1.server_sig.assign(sig.begin(), sig.end());
  transcript.absorb(encode_message(s1));

  return {s1, PendingAcceptor{hello, std::move(client), key_block, std::move(transcript)}};
}

std::pair<ClientAuth, SecurityContext> finish_initiate(PendingInitiator pending,
                                                       const ServerAuth& auth,
                                                       std::span<const Certificate> trust_anchors,
                                                       UtcTime now) {
  auto server = rethrow_as(Errc::BadServerChain,
                           [&] { return verify_chain(auth.server_chain, trust_anchors, now); });
  auto signed_hash = pending.transcript.hash_with(encode_server_auth_unsigned(auth));
  if (!ed25519_verify(server.leaf_key, signed_hash, auth.server_sig))
    throw Error(Errc::BadServerSignature, "transcript signature does not verify");

  auto key_block = derive_key_block(pending.eph.agree(auth.server_eph_pub),
                                    pending.hello.client_nonce, auth.server_nonce);
  pending.transcript.absorb(encode_message(auth));
  auto sig = pending.chain.leaf_key.sign(pending.transcript.hash());
  ClientAuth c2{Bytes(sig.begin(), sig.end())};
  pending.transcript.absorb(encode_message(c2));

  SecurityContext ctx(Role::Initiator, key_block, std::move(server), pending.transcript.hash(),
                      auth.server_chain);
  return {std::move(c2), std::move(ctx)};
}

SecurityContext finish_accept(PendingAcceptor pending, const ClientAuth& auth) {
  if (!ed25519_verify(pending.client.leaf_key, pending.transcript.hash(), auth.client_sig))
    throw Error(Errc::BadClientSignature, "transcript signature does not verify");
  pending.transcript.absorb(encode_message(auth));
  return SecurityContext(Role::Acceptor, pending.key_block, std::move(pending.client),
                         pending.transcript.hash(), std::move(pending.hello.client_chain));
}

KeyPair delegate_request(Rng& rng) { return KeyPair::generate(rng); }

Certificate delegate_fulfill(const CredentialChain& chain, const PublicKey& server_pub,
                             std::uint32_t lifetime_seconds, UtcTime now, Rng& rng) {
  return issue_proxy_certificate(chain, server_pub, lifetime_seconds, now, rng);
}

CredentialChain accept_delegation(const SecurityContext& ctx, const KeyPair& delegate_key,
                                  const Certificate& delegated,
                                  std::span<const Certificate> trust_anchors, UtcTime now) {
  if (delegated.subject_key != delegate_key.verifying_key())
    throw Error(Errc::BadDelegation, "delegated certificate is not for the requested key");
  if (!delegated.is_proxy())
    throw Error(Errc::BadDelegation, "delegated certificate is not a proxy");
  std::vector<Certificate> certs{delegated};
  certs.insert(certs.end(), ctx.peer_chain().begin(), ctx.peer_chain().end());
  auto id = rethrow_as(Errc::BadDelegation, [&] { return verify_chain(certs, trust_anchors, now); });
  if (id.base_dn != ctx.peer().base_dn)
    throw Error(Errc::BadDelegation, "delegated identity differs from authenticated peer");
  return CredentialChain{std::move(certs), delegate_key};
}

}  // namespace saz

namespace saz {

void send_token(Stream& s, const Message& msg) { write_frame(s, encode_message(msg)); }

void send_protected(Stream& s, SecurityContext& ctx, const Message& msg) {
  write_frame(s, encode_message(ctx.wrap(encode_message(msg))));
}

Bytes receive_protected(Stream& s, SecurityContext& ctx) {
  auto frame = read_frame(s);
  if (!frame) throw Error(Errc::Closed, "peer closed before protected message");
  ProtectedMessage msg;
  try {
    msg = decode_as<ProtectedMessage>(*frame);
  } catch (const Error& e) {
    throw Error(Errc::IntegrityFailure, "unparseable protected frame", e.code());
  }
  return ctx.unwrap(msg);
}

}  // namespace saz
