#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace saz {

/// Every failure the library raises carries one of these codes.
enum class Errc {
  // credential
  MalformedDN,
  InvalidValidity,
  ExpiredChain,
  UntrustedAnchor,
  BrokenLinkage,
  BadSignature,
  Expired,
  NotYetValid,
  MalformedProxy,
  MalformedCredentialFile,
  // framing and codec
  Oversize,
  Truncated,
  ZeroLength,
  UnknownTag,
  Malformed,
  // handshake and channel
  UnsupportedVersion,
  MalformedToken,
  BadClientChain,
  BadServerChain,
  BadServerSignature,
  BadClientSignature,
  IntegrityFailure,
  BadDelegation,
  UnknownOperation,
  // policy store
  CorruptJournal,
  StorageFailure,
  // gatekeeper
  MalformedLine,
  // transport
  Closed,
  Timeout,
  ConnectFailure,
  BindFailure,
  Io,
  InvalidArgument,
};

std::string_view errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail, std::optional<Errc> cause = std::nullopt,
        std::size_t line = 0)
      : std::runtime_error(std::string(errc_name(code)) + ": " + detail),
        code_(code),
        cause_(cause),
        line_(line) {}

  Errc code() const noexcept { return code_; }
  /// Underlying code when this error wraps another (e.g. BadClientChain <- Expired).
  std::optional<Errc> cause() const noexcept { return cause_; }
  /// 1-based line number for CorruptJournal and MalformedLine, else 0.
  std::size_t line() const noexcept { return line_; }

 private:
  Errc code_;
  std::optional<Errc> cause_;
  std::size_t line_;
};

}  // namespace saz
