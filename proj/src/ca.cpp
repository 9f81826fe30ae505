#include <algorithm>
#include <cstdint>
#include <filesystem>

#include "saz/credential.hpp"
#include "saz/error.hpp"
#include "saz/tools.hpp"

namespace saz {
namespace {

template <class... Fs>
struct overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

std::chrono::seconds days(int n) { return std::chrono::seconds{std::int64_t{n} * 86400}; }

}  // namespace

ToolResult run_ca(const CaCommand& cmd, UtcTime now, Rng& rng) {
  ToolResult result;
  try {
    std::visit(
        overloaded{
            [&](const ca::Init& c) {
              if (c.days <= 0) throw Error(Errc::InvalidArgument, "--days must be positive");
              auto dn = parse_dn(c.ca_dn);
              auto key = KeyPair::generate(rng);
              auto cert = issue_certificate(key, std::nullopt, dn, key.verifying_key(),
                                            {now, now + days(c.days)}, rng.next_u64());
              std::filesystem::create_directories(c.out_dir);
              auto path = c.out_dir / "ca.chain";
              save_credentials(path, CredentialChain{{cert}, key});
              result.out = "wrote " + path.string() + "\n";
            },
            [&](const ca::Issue& c) {
              if (c.days <= 0) throw Error(Errc::InvalidArgument, "--days must be positive");
              auto subject = parse_dn(c.subject_dn);
              auto authority = load_credentials(c.ca_chain);
              const auto& ca_cert = authority.anchor();
              if (now >= ca_cert.not_after) throw Error(Errc::ExpiredChain, "CA certificate expired");
              auto key = KeyPair::generate(rng);
              auto not_after = std::min(now + days(c.days), ca_cert.not_after);
              auto cert = issue_certificate(authority.leaf_key, ca_cert.subject, subject,
                                            key.verifying_key(), {now, not_after}, rng.next_u64());
              save_credentials(c.out, CredentialChain{{cert, ca_cert}, key});
              result.out = "wrote " + c.out.string() + "\n";
            },
            [&](const ca::Proxy& c) {
              if (c.hours == 0) throw Error(Errc::InvalidArgument, "--hours must be positive");
              auto chain = load_credentials(c.chain);
              auto lifetime = std::min<std::uint64_t>(std::uint64_t{c.hours} * 3600, UINT32_MAX);
              auto proxy = create_proxy(chain, static_cast<std::uint32_t>(lifetime), now, rng);
              save_credentials(c.out, proxy);
              result.out = "wrote " + c.out.string() + " (expires " +
                           format_rfc3339(proxy.leaf().not_after) + ")\n";
            },
        },
        cmd);
  } catch (const Error& e) {
    bool io = e.code() == Errc::Io || e.code() == Errc::MalformedCredentialFile;
    result.exit_code = io ? 2 : 1;
    result.err = std::string("saz-ca: ") + e.what() + "\n";
  } catch (const std::filesystem::filesystem_error& e) {
    result.exit_code = 2;
    result.err = std::string("saz-ca: ") + e.what() + "\n";
  }
  return result;
}

}  // namespace saz
