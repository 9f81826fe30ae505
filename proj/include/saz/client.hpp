#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

#include "saz/credential.hpp"
#include "saz/frame.hpp"
#include "saz/net.hpp"

namespace saz {

enum class ErrorKind { Connect, Handshake, Protocol, Integrity, Timeout };
std::string_view error_kind_name(ErrorKind k);

/// Allow and Deny come only from an intact DecisionMessage; everything else is an error.
class Outcome {
 public:
  enum class Kind { Allow, Deny, Error };

  static Outcome allow() { return Outcome(Kind::Allow, ErrorKind::Protocol, {}); }
  static Outcome deny() { return Outcome(Kind::Deny, ErrorKind::Protocol, {}); }
  static Outcome error(ErrorKind kind, std::string detail) {
    return Outcome(Kind::Error, kind, std::move(detail));
  }

  Kind kind() const noexcept { return kind_; }
  bool is_allow() const noexcept { return kind_ == Kind::Allow; }
  bool is_deny() const noexcept { return kind_ == Kind::Deny; }
  bool is_error() const noexcept { return kind_ == Kind::Error; }
  /// Meaningful only when is_error().
  ErrorKind error_kind() const noexcept { return error_; }
  const std::string& detail() const noexcept { return detail_; }

  /// Compares kind and error kind; detail is informational.
  friend bool operator==(const Outcome& a, const Outcome& b) {
    return a.kind_ == b.kind_ && (a.kind_ != Kind::Error || a.error_ == b.error_);
  }

 private:
  Outcome(Kind k, ErrorKind e, std::string d) : kind_(k), error_(e), detail_(std::move(d)) {}
  Kind kind_;
  ErrorKind error_;
  std::string detail_;
};

std::string describe(const Outcome& o);

struct ClientConfig {
  Endpoint server;
  CredentialChain chain;
  std::vector<Certificate> trust_anchors;
  std::string op_name = "SAZ";
  bool delegate = false;
  std::chrono::seconds timeout{10};
  std::uint32_t delegation_lifetime_seconds = 3600;
  Clock clock = system_clock();
};

/// Connects, authenticates, asks for `op_name` and reads one decision. Never throws.
Outcome authorize(const ClientConfig& config);
/// Same protocol over an already established stream.
Outcome authorize(Stream& conn, const ClientConfig& config, Rng& rng);

struct CalloutResult {
  int exit_code = 2;
  std::string status_line;
  friend bool operator==(const CalloutResult&, const CalloutResult&) = default;
};

/// Allow -> 0 "SAZ: YES"; Deny -> 1 "SAZ: NO"; Error -> 2 "SAZ: ERROR <kind>".
CalloutResult callout_result(const Outcome& outcome);

/// Gatekeeper callout: proxy chain at `proxy_path` (key at proxy_path.key) and a JSON config
/// {"server": "HOST:PORT", "anchors": PATH, "op": "SAZ", "delegate": false, "timeout": 10}.
/// Unreadable or invalid inputs yield exit 2.
CalloutResult callout(const std::filesystem::path& proxy_path,
                      const std::filesystem::path& config_path);

}  // namespace saz
