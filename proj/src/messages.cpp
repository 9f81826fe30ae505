#include "saz/messages.hpp"

#include "saz/codec.hpp"
#include "saz/error.hpp"

namespace saz {
namespace {

template <class... Fs>
struct overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

void put_server_auth_fields(Writer& w, const ServerAuth& s) {
  w.u8(tag::ServerAuth).bytes(s.server_eph_pub).bytes(s.server_nonce);
  put_chain(w, s.server_chain);
}

}  // namespace

std::string_view verdict_text(Verdict v) { return v == Verdict::Yes ? "YES" : "NO"; }

Bytes encode_server_auth_unsigned(const ServerAuth& s1) {
  Writer w;
  put_server_auth_fields(w, s1);
  return std::move(w).take();
}

Bytes encode_message(const Message& msg) {
  Writer w;
  std::visit(overloaded{
                 [&](const ClientHello& m) {
                   w.u8(tag::ClientHello).u8(m.version).bytes(m.client_eph_pub).bytes(m.client_nonce);
                   put_chain(w, m.client_chain);
                 },
                 [&](const ServerAuth& m) {
                   put_server_auth_fields(w, m);
                   w.bytes(m.server_sig);
                 },
                 [&](const ClientAuth& m) { w.u8(tag::ClientAuth).bytes(m.client_sig); },
                 [&](const ProtectedMessage& m) { w.u8(tag::Protected).bytes(m.body).bytes(m.mac); },
                 [&](const OperationRequest& m) {
                   w.u8(tag::OperationRequest).str(m.op_name).u8(m.delegate ? 1 : 0);
                 },
                 [&](const DecisionMessage& m) { w.u8(tag::Decision).str(verdict_text(m.verdict)); },
                 [&](const DelegationRequest& m) {
                   w.u8(tag::DelegationRequest).bytes(m.delegate_key);
                 },
                 [&](const DelegationResponse& m) {
                   w.u8(tag::DelegationResponse);
                   put_certificate(w, m.proxy);
                 },
             },
             msg);
  return std::move(w).take();
}

Message decode_message(ByteView in) {
  if (in.empty()) throw Error(Errc::Malformed, "empty message");
  Reader r(in);
  auto t = r.u8();
  Message out = [&]() -> Message {
    switch (t) {
      case tag::ClientHello: {
        ClientHello m;
        m.version = r.u8();
        m.client_eph_pub = r.fixed<32>();
        m.client_nonce = r.fixed<16>();
        m.client_chain = get_chain(r);
        return m;
      }
      case tag::ServerAuth: {
        ServerAuth m;
        m.server_eph_pub = r.fixed<32>();
        m.server_nonce = r.fixed<16>();
        m.server_chain = get_chain(r);
        m.server_sig = r.bytes();
        return m;
      }
      case tag::ClientAuth:
        return ClientAuth{r.bytes()};
      case tag::Protected: {
        ProtectedMessage m;
        m.body = r.bytes();
        m.mac = r.fixed<32>();
        return m;
      }
      case tag::OperationRequest: {
        OperationRequest m;
        m.op_name = r.str();
        Reader::check(!m.op_name.empty() && m.op_name.size() <= kMaxOpName, "op_name length");
        auto flag = r.u8();
        Reader::check(flag <= 1, "delegate flag");
        m.delegate = flag == 1;
        return m;
      }
      case tag::Decision: {
        auto v = r.str();
        Reader::check(v == "YES" || v == "NO", "verdict");
        return DecisionMessage{v == "YES" ? Verdict::Yes : Verdict::No};
      }
      case tag::DelegationRequest:
        return DelegationRequest{r.fixed<32>()};
      case tag::DelegationResponse:
        return DelegationResponse{get_certificate(r)};
      default:
        throw Error(Errc::UnknownTag, "tag " + std::to_string(t));
    }
  }();
  r.finish();
  return out;
}

}  // namespace saz
