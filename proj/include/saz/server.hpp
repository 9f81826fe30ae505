#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>

#include "saz/credential.hpp"
#include "saz/handshake.hpp"
#include "saz/net.hpp"
#include "saz/policy_store.hpp"

namespace saz {

using Handler =
    std::function<DecisionMessage(const VerifiedIdentity&, const PolicyStore&, UtcTime)>;

/// "YES" iff the peer's base DN is on the allowlist.
DecisionMessage saz_handler(const VerifiedIdentity& peer, const PolicyStore& store, UtcTime now);
/// "YES" iff one of the peer's time windows contains `now`.
DecisionMessage time_handler(const VerifiedIdentity& peer, const PolicyStore& store, UtcTime now);

class HandlerRegistry {
 public:
  /// Registry holding the built-in handlers named in `enabled` ("SAZ", "TIME").
  static HandlerRegistry with(const std::set<std::string>& enabled);

  void add(std::string op_name, Handler handler) { handlers_[std::move(op_name)] = std::move(handler); }
  const Handler* find(std::string_view op_name) const;

 private:
  std::map<std::string, Handler, std::less<>> handlers_;
};

struct ConnectionLog {
  UtcTime ts;
  std::optional<DistinguishedName> peer;
  std::optional<std::string> op;
  std::optional<Verdict> verdict;  // empty: closed without a decision
  std::string reason;
  std::optional<Errc> error;
  std::chrono::microseconds elapsed{0};
};

/// ts, peer_dn|-, op|-, verdict|CLOSED, reason, micros, TAB-separated.
std::string format_log_line(const ConnectionLog& log);

struct ConnectionEnv {
  const CredentialChain& server_chain;
  std::span<const Certificate> trust_anchors;
  const PolicyStore& store;
  const HandlerRegistry& registry;
  const Clock& clock;
  Rng& rng;
};

/// Runs one connection to completion: handshake, one operation, at most one decision, close.
/// Any protocol failure closes the stream without a decision. Never throws.
ConnectionLog handle_connection(Stream& conn, const ConnectionEnv& env);

struct ServerConfig {
  Endpoint listen{"127.0.0.1", 0};
  CredentialChain server_chain;
  std::vector<Certificate> trust_anchors;
  std::filesystem::path store_path;
  std::set<std::string> enabled_handlers{"SAZ"};
  std::size_t max_connections = 64;
  Clock clock = system_clock();
  std::chrono::milliseconds io_timeout{10'000};
  std::function<void(const ConnectionLog&)> log;  // default: one line on stderr
};

/// Accept loop plus one thread per connection. The policy store is opened read-only.
class Server {
 public:
  /// Throws StorageFailure/CorruptJournal (store) or BindFailure.
  explicit Server(ServerConfig config);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  void start();
  /// Stops accepting and waits for in-flight connections.
  void stop();
  void reload_store();

  Endpoint local_endpoint() const;
  std::size_t connections_handled() const noexcept;

 private:
  struct State;
  std::shared_ptr<State> state_;
};

/// Runs until SIGINT/SIGTERM; SIGHUP reloads the store. Returns the process exit status.
int run(ServerConfig config);

}  // namespace saz
