#include "saz/client.hpp"

#include <optional>

#include <json.hpp>

#include "saz/error.hpp"
#include "saz/handshake.hpp"

namespace saz {
namespace {

ErrorKind classify(Errc code, bool handshake_done) {
  switch (code) {
    case Errc::Timeout: return ErrorKind::Timeout;
    case Errc::IntegrityFailure: return ErrorKind::Integrity;
    case Errc::ConnectFailure: return ErrorKind::Connect;
    case Errc::BadServerChain:
    case Errc::BadServerSignature:
    case Errc::MalformedToken:
    case Errc::UnsupportedVersion:
      return ErrorKind::Handshake;
    default:
      return handshake_done ? ErrorKind::Protocol : ErrorKind::Handshake;
  }
}

}  // namespace

std::string_view error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::Connect: return "Connect";
    case ErrorKind::Handshake: return "Handshake";
    case ErrorKind::Protocol: return "Protocol";
    case ErrorKind::Integrity: return "Integrity";
    case ErrorKind::Timeout: return "Timeout";
  }
  return "Protocol";
}

std::string describe(const Outcome& o) {
  switch (o.kind()) {
    case Outcome::Kind::Allow: return "Allow";
    case Outcome::Kind::Deny: return "Deny";
    case Outcome::Kind::Error: break;
  }
  return "Error(" + std::string(error_kind_name(o.error_kind())) + "): " + o.detail();
}

Outcome authorize(Stream& conn, const ClientConfig& config, Rng& rng) {
  bool handshake_done = false;
  try {
    auto [hello, pending] = initiate(config.chain, rng);
    send_token(conn, hello);
    auto s1 = receive_token<ServerAuth>(conn);
    auto [c2, ctx] = finish_initiate(std::move(pending), s1, config.trust_anchors, config.clock());
    send_token(conn, c2);
    handshake_done = true;

    send_protected(conn, ctx, OperationRequest{config.op_name, config.delegate});
    if (config.delegate) {
      auto request = decode_as<DelegationRequest>(receive_protected(conn, ctx));
      auto cert = delegate_fulfill(config.chain, request.delegate_key,
                                   config.delegation_lifetime_seconds, config.clock(), rng);
      send_protected(conn, ctx, DelegationResponse{std::move(cert)});
    }
    auto decision = decode_as<DecisionMessage>(receive_protected(conn, ctx));
    conn.close();
    return decision.verdict == Verdict::Yes ? Outcome::allow() : Outcome::deny();
  } catch (const Error& e) {
    conn.close();
    // writes after the server hung up surface as Closed; the close itself is the signal
    return Outcome::error(classify(e.code(), handshake_done), e.what());
  } catch (const std::exception& e) {
    conn.close();
    return Outcome::error(handshake_done ? ErrorKind::Protocol : ErrorKind::Handshake, e.what());
  }
}

Outcome authorize(const ClientConfig& config) {
  using namespace std::chrono;
  const auto deadline = steady_clock::now() + config.timeout;
  try {
    auto conn = connect_tcp(config.server, duration_cast<milliseconds>(config.timeout),
                            duration_cast<milliseconds>(config.timeout));
    conn.set_deadline(deadline);
    SystemRng rng;
    return authorize(conn, config, rng);
  } catch (const Error& e) {
    return Outcome::error(e.code() == Errc::Timeout ? ErrorKind::Timeout : ErrorKind::Connect,
                          e.what());
  } catch (const std::exception& e) {
    return Outcome::error(ErrorKind::Connect, e.what());
  }
}

CalloutResult callout_result(const Outcome& outcome) {
  switch (outcome.kind()) {
    case Outcome::Kind::Allow: return {0, "SAZ: YES"};
    case Outcome::Kind::Deny: return {1, "SAZ: NO"};
    case Outcome::Kind::Error: break;
  }
  return {2, "SAZ: ERROR " + std::string(error_kind_name(outcome.error_kind()))};
}

CalloutResult callout(const std::filesystem::path& proxy_path,
                      const std::filesystem::path& config_path) {
  std::optional<ClientConfig> config;
  try {
    auto json = nlohmann::json::parse(to_string(read_file(config_path)));
    config.emplace(ClientConfig{
        .server = parse_endpoint(json.at("server").get<std::string>()),
        .chain = load_credentials(proxy_path),
        .trust_anchors = read_chain_file(json.at("anchors").get<std::string>()),
        .op_name = json.value("op", std::string("SAZ")),
        .delegate = json.value("delegate", false),
        .timeout = std::chrono::seconds{json.value("timeout", 10)},
    });
  } catch (const std::exception&) {
    return {2, "SAZ: ERROR Config"};
  }
  return callout_result(authorize(*config));
}

}  // namespace saz
