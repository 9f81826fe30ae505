#pragma once

#include <string>
#include <variant>
#include <vector>

#include "saz/bytes.hpp"
#include "saz/credential.hpp"
#include "saz/error.hpp"

namespace saz {

inline constexpr std::uint8_t kProtocolVersion = 1;
inline constexpr std::size_t kMaxOpName = 64;

struct ClientHello {
  std::uint8_t version = kProtocolVersion;
  PublicKey client_eph_pub{};
  FixedBytes<16> client_nonce{};
  std::vector<Certificate> client_chain;
  friend bool operator==(const ClientHello&, const ClientHello&) = default;
};

struct ServerAuth {
  PublicKey server_eph_pub{};
  FixedBytes<16> server_nonce{};
  std::vector<Certificate> server_chain;
  Bytes server_sig;
  friend bool operator==(const ServerAuth&, const ServerAuth&) = default;
};

struct ClientAuth {
  Bytes client_sig;
  friend bool operator==(const ClientAuth&, const ClientAuth&) = default;
};

struct ProtectedMessage {
  Bytes body;
  MacTag mac{};
  friend bool operator==(const ProtectedMessage&, const ProtectedMessage&) = default;
};

struct OperationRequest {
  std::string op_name;
  bool delegate = false;
  friend bool operator==(const OperationRequest&, const OperationRequest&) = default;
};

enum class Verdict { Yes, No };
std::string_view verdict_text(Verdict v);

struct DecisionMessage {
  Verdict verdict = Verdict::No;
  friend bool operator==(const DecisionMessage&, const DecisionMessage&) = default;
};

struct DelegationRequest {
  PublicKey delegate_key{};
  friend bool operator==(const DelegationRequest&, const DelegationRequest&) = default;
};

struct DelegationResponse {
  Certificate proxy;
  friend bool operator==(const DelegationResponse&, const DelegationResponse&) = default;
};

using Message = std::variant<ClientHello, ServerAuth, ClientAuth, ProtectedMessage,
                             OperationRequest, DecisionMessage, DelegationRequest,
                             DelegationResponse>;

/// Tag byte, then fields in declared order.
Bytes encode_message(const Message& msg);
/// Throws UnknownTag or Malformed (including trailing bytes and constraint violations).
Message decode_message(ByteView in);

/// ServerAuth without its signature field: what the server signs over.
Bytes encode_server_auth_unsigned(const ServerAuth& s1);

/// Decodes and requires alternative T; a different valid message is Malformed.
template <class T>
T decode_as(ByteView in) {
  auto msg = decode_message(in);
  if (auto* v = std::get_if<T>(&msg)) return std::move(*v);
  throw Error(Errc::Malformed, "unexpected message type");
}

}  // namespace saz
