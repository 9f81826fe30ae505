#include "saz/error.hpp"

#include "saz/bytes.hpp"

namespace saz {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::MalformedDN: return "MalformedDN";
    case Errc::InvalidValidity: return "InvalidValidity";
    case Errc::ExpiredChain: return "ExpiredChain";
    case Errc::UntrustedAnchor: return "UntrustedAnchor";
    case Errc::BrokenLinkage: return "BrokenLinkage";
    case Errc::BadSignature: return "BadSignature";
    case Errc::Expired: return "Expired";
    case Errc::NotYetValid: return "NotYetValid";
    case Errc::MalformedProxy: return "MalformedProxy";
    case Errc::MalformedCredentialFile: return "MalformedCredentialFile";
    case Errc::Oversize: return "Oversize";
    case Errc::Truncated: return "Truncated";
    case Errc::ZeroLength: return "ZeroLength";
    case Errc::UnknownTag: return "UnknownTag";
    case Errc::Malformed: return "Malformed";
    case Errc::UnsupportedVersion: return "UnsupportedVersion";
    case Errc::MalformedToken: return "MalformedToken";
    case Errc::BadClientChain: return "BadClientChain";
    case Errc::BadServerChain: return "BadServerChain";
    case Errc::BadServerSignature: return "BadServerSignature";
    case Errc::BadClientSignature: return "BadClientSignature";
    case Errc::IntegrityFailure: return "IntegrityFailure";
    case Errc::BadDelegation: return "BadDelegation";
    case Errc::UnknownOperation: return "UnknownOperation";
    case Errc::CorruptJournal: return "CorruptJournal";
    case Errc::StorageFailure: return "StorageFailure";
    case Errc::MalformedLine: return "MalformedLine";
    case Errc::Closed: return "Closed";
    case Errc::Timeout: return "Timeout";
    case Errc::ConnectFailure: return "ConnectFailure";
    case Errc::BindFailure: return "BindFailure";
    case Errc::Io: return "Io";
    case Errc::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

std::string to_hex(ByteView b) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  out.reserve(b.size() * 2);
  for (auto c : b) {
    out.push_back(digits[c >> 4]);
    out.push_back(digits[c & 0xf]);
  }
  return out;
}

}  // namespace saz
