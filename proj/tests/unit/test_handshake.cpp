#include <doctest.h>

#include <random>

#include "saz/error.hpp"
#include "saz/handshake.hpp"
#include "test_pki.hpp"

using namespace saz;
using namespace saz::testing;
using namespace std::chrono_literals;

namespace {

const UtcTime kNow = make_utc(2026, 10, 15, 12);

struct Parties {
  SeededRng rng{21};
  TestCa ca = make_ca("/O=Grid", rng);
  CredentialChain client = create_proxy(issue_user(ca, "/O=Grid/CN=alice", rng), 3600, kNow, rng);
  CredentialChain server = issue_user(ca, "/O=Grid/CN=saz.example.org", rng);
  std::vector<Certificate> anchors = ca.anchors();
};

struct Established {
  SecurityContext initiator;
  SecurityContext acceptor;
};

Established handshake(Parties& p) {
  auto [c1, pi] = initiate(p.client, p.rng);
  auto [s1, pa] = respond(c1, p.server, p.anchors, kNow, p.rng);
  auto [c2, ictx] = finish_initiate(std::move(pi), s1, p.anchors, kNow);
  auto actx = finish_accept(std::move(pa), c2);
  return {std::move(ictx), std::move(actx)};
}

template <class F>
Error error_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e;
  }
  FAIL("expected an error");
  return Error(Errc::Io, "unreachable");
}

}  // namespace

TEST_CASE("initiate") {
  Parties p;
  SeededRng r1(1), r2(2);
  auto [h1, p1] = initiate(p.client, r1);
  auto [h2, p2] = initiate(p.client, r2);
  CHECK(h1.version == 1);
  CHECK(h1.client_nonce != h2.client_nonce);
  CHECK(h1.client_eph_pub != h2.client_eph_pub);
  CHECK(h1.client_chain == p.client.certs);
  CHECK(p1.transcript.hash() == sha256(encode_message(h1)));
}

TEST_CASE("full handshake agreement") {
  Parties p;
  auto [ictx, actx] = handshake(p);
  CHECK(ictx.send_key() == actx.recv_key());
  CHECK(ictx.recv_key() == actx.send_key());
  CHECK(ictx.send_key() != ictx.recv_key());
  CHECK(ictx.transcript_hash() == actx.transcript_hash());
  CHECK(ictx.peer().base_dn == parse_dn("/O=Grid/CN=saz.example.org"));
  CHECK(actx.peer().base_dn == parse_dn("/O=Grid/CN=alice"));
  CHECK(actx.peer().leaf_dn == parse_dn("/O=Grid/CN=alice/CN=proxy"));
  CHECK(ictx.role() == Role::Initiator);
  CHECK(actx.role() == Role::Acceptor);
}

TEST_CASE("property: handshake agreement over many identities") {
  SeededRng rng(22);
  for (int i = 0; i < 30; ++i) {
    auto ca = make_ca("/O=Grid" + std::to_string(i), rng);
    auto client = issue_proxy(ca, "/O=Grid" + std::to_string(i) + "/CN=u" + std::to_string(i), rng);
    for (int levels = i % 3; levels > 0; --levels) client = create_proxy(client, 3600, kNow, rng);
    auto server = issue_user(ca, "/O=Grid" + std::to_string(i) + "/CN=server", rng);
    auto anchors = ca.anchors();
    auto [c1, pi] = initiate(client, rng);
    auto [s1, pa] = respond(c1, server, anchors, kNow, rng);
    auto [c2, ictx] = finish_initiate(std::move(pi), s1, anchors, kNow);
    auto actx = finish_accept(std::move(pa), c2);
    CHECK(ictx.send_key() == actx.recv_key());
    CHECK(actx.send_key() == ictx.recv_key());
    CHECK(actx.peer().base_dn == extract_base_dn(client.leaf().subject));
    CHECK(ictx.peer().base_dn == server.leaf().subject);
  }
}

TEST_CASE("respond rejections") {
  Parties p;
  auto [c1, pi] = initiate(p.client, p.rng);

  SUBCASE("version 2") {
    auto hello = c1;
    hello.version = 2;
    CHECK(error_of([&] { respond(hello, p.server, p.anchors, kNow, p.rng); }).code() ==
          Errc::UnsupportedVersion);
  }
  SUBCASE("expired client proxy") {
    auto e = error_of([&] { respond(c1, p.server, p.anchors, kNow + 2h, p.rng); });
    CHECK(e.code() == Errc::BadClientChain);
    CHECK(e.cause() == Errc::Expired);
  }
  SUBCASE("untrusted client CA") {
    auto rogue = make_ca("/O=Grid", p.rng);
    auto [h, _] = initiate(issue_proxy(rogue, "/O=Grid/CN=alice", p.rng), p.rng);
    auto e = error_of([&] { respond(h, p.server, p.anchors, kNow, p.rng); });
    CHECK(e.code() == Errc::BadClientChain);
    CHECK(e.cause() == Errc::UntrustedAnchor);
  }
}

TEST_CASE("finish_initiate rejections") {
  Parties p;
  auto [c1, pi] = initiate(p.client, p.rng);
  auto [s1, pa] = respond(c1, p.server, p.anchors, kNow, p.rng);

  SUBCASE("flipped signature byte") {
    auto bad = s1;
    bad.server_sig[5] ^= 0x01;
    CHECK(error_of([&] { finish_initiate(pi, bad, p.anchors, kNow); }).code() ==
          Errc::BadServerSignature);
  }
  SUBCASE("re-signed by a different trusted identity") {
    auto other = issue_user(p.ca, "/O=Grid/CN=other", p.rng);
    auto bad = s1;
    bad.server_chain = other.certs;
    CHECK(error_of([&] { finish_initiate(pi, bad, p.anchors, kNow); }).code() ==
          Errc::BadServerSignature);
    // signed by the other identity over the transcript containing the original chain
    Transcript t;
    t.absorb(encode_message(c1));
    auto sig = other.leaf_key.sign(t.hash_with(encode_server_auth_unsigned(s1)));
    auto resigned = s1;
    resigned.server_sig.assign(sig.begin(), sig.end());
    CHECK(error_of([&] { finish_initiate(pi, resigned, p.anchors, kNow); }).code() ==
          Errc::BadServerSignature);
  }
  SUBCASE("swapped ephemeral key") {
    auto bad = s1;
    bad.server_eph_pub[0] ^= 0x40;
    CHECK(error_of([&] { finish_initiate(pi, bad, p.anchors, kNow); }).code() ==
          Errc::BadServerSignature);
  }
  SUBCASE("untrusted server chain") {
    auto rogue = make_ca("/O=Rogue", p.rng);
    auto rogue_server = issue_user(rogue, "/O=Rogue/CN=saz", p.rng);
    auto [rs1, _] = respond(c1, rogue_server, p.anchors, kNow, p.rng);
    CHECK(error_of([&] { finish_initiate(pi, rs1, p.anchors, kNow); }).code() == Errc::BadServerChain);
  }
}

TEST_CASE("finish_accept rejects a signature by another key") {
  Parties p;
  auto [c1, pi] = initiate(p.client, p.rng);
  auto [s1, pa] = respond(c1, p.server, p.anchors, kNow, p.rng);
  auto [c2, ictx] = finish_initiate(pi, s1, p.anchors, kNow);

  auto stranger = KeyPair::generate(p.rng);
  Transcript t;
  t.absorb(encode_message(c1));
  t.absorb(encode_message(s1));
  auto sig = stranger.sign(t.hash());
  ClientAuth forged{Bytes(sig.begin(), sig.end())};
  CHECK(error_of([&] { finish_accept(pa, forged); }).code() == Errc::BadClientSignature);

  auto honest = finish_accept(pa, c2);
  CHECK(honest.send_key() == ictx.recv_key());
}

TEST_CASE("wrap and unwrap") {
  Parties p;
  auto [ictx, actx] = handshake(p);
  std::mt19937_64 gen(23);

  SUBCASE("round trip in order, both directions") {
    for (int i = 0; i < 50; ++i) {
      Bytes body(gen() % 200);
      for (auto& b : body) b = static_cast<std::uint8_t>(gen());
      auto& sender = (i % 2) ? ictx : actx;
      auto& receiver = (i % 2) ? actx : ictx;
      CHECK(receiver.unwrap(sender.wrap(body)) == body);
    }
    CHECK(ictx.send_seq() == 25);
    CHECK(actx.recv_seq() == 25);
  }
  SUBCASE("any single-bit flip fails") {
    auto msg = ictx.wrap(as_bytes("SAZ request body"));
    for (std::size_t bit = 0; bit < (msg.body.size() + msg.mac.size()) * 8; ++bit) {
      auto bad = msg;
      if (bit < bad.body.size() * 8)
        bad.body[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
      else
        bad.mac[(bit / 8) - bad.body.size()] ^= static_cast<std::uint8_t>(1u << (bit % 8));
      CHECK(error_of([&] { actx.unwrap(bad); }).code() == Errc::IntegrityFailure);
    }
    CHECK(actx.unwrap(msg) == Bytes(msg.body));
  }
  SUBCASE("replay and reordering fail") {
    auto m0 = ictx.wrap(as_bytes("zero"));
    auto m1 = ictx.wrap(as_bytes("one"));
    CHECK(error_of([&] { actx.unwrap(m1); }).code() == Errc::IntegrityFailure);
    CHECK(actx.unwrap(m0) == Bytes(m0.body));
    CHECK(error_of([&] { actx.unwrap(m0); }).code() == Errc::IntegrityFailure);
    CHECK(actx.unwrap(m1) == Bytes(m1.body));
  }
  SUBCASE("reflection back to the sender fails") {
    auto m = ictx.wrap(as_bytes("mirror"));
    CHECK(error_of([&] { ictx.unwrap(m); }).code() == Errc::IntegrityFailure);
  }
}

TEST_CASE("delegation") {
  Parties p;
  auto [ictx, actx] = handshake(p);

  SUBCASE("honest delegation chains to the client base DN") {
    auto server_key = delegate_request(p.rng);
    auto cert = delegate_fulfill(p.client, server_key.verifying_key(), 600, kNow, p.rng);
    CHECK(cert.subject == p.client.leaf().subject.with_proxy());
    auto delegated = accept_delegation(actx, server_key, cert, p.anchors, kNow);
    CHECK(verify_chain(delegated.certs, p.anchors, kNow).base_dn == parse_dn("/O=Grid/CN=alice"));
    CHECK(delegated.leaf_key == server_key);
  }
  SUBCASE("certificate signed by the wrong key") {
    auto server_key = delegate_request(p.rng);
    auto impostor = issue_proxy(p.ca, "/O=Grid/CN=alice", p.rng);
    auto cert = delegate_fulfill(impostor, server_key.verifying_key(), 600, kNow, p.rng);
    CHECK(error_of([&] { accept_delegation(actx, server_key, cert, p.anchors, kNow); }).code() ==
          Errc::BadDelegation);
  }
  SUBCASE("certificate over a different key") {
    auto server_key = delegate_request(p.rng);
    auto other = delegate_request(p.rng);
    auto cert = delegate_fulfill(p.client, other.verifying_key(), 600, kNow, p.rng);
    CHECK(error_of([&] { accept_delegation(actx, server_key, cert, p.anchors, kNow); }).code() ==
          Errc::BadDelegation);
  }
}
