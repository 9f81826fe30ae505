#pragma once

// Library side of the saz-admin and saz-ca command-line tools.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "saz/crypto.hpp"
#include "saz/time.hpp"

namespace saz {

struct ToolResult {
  int exit_code = 0;
  std::string out;
  std::string err;
};

namespace admin {
struct Add {
  std::string dn;
  std::string note;
};
struct Remove {
  std::string dn;
};
struct List {};
struct WindowAdd {
  std::string dn;
  int day = 0;
  int start_minute = 0;
  int end_minute = 0;
};
struct WindowRemove {
  std::string dn;
  int day = 0;
  int start_minute = 0;
  int end_minute = 0;
};
struct Compact {};
}  // namespace admin

using AdminCommand = std::variant<admin::Add, admin::Remove, admin::List, admin::WindowAdd,
                                  admin::WindowRemove, admin::Compact>;

/// Exit 0 on success, 1 on a malformed argument, 2 on CorruptJournal/StorageFailure.
/// `list` prints `<dn>\t<added_at>\t<note>` per record, sorted by DN.
ToolResult run_admin(const AdminCommand& cmd, const std::filesystem::path& store_path, UtcTime now);

/// "0".."6" or Mon..Sun (case-insensitive, 3+ letters).
std::optional<int> parse_day(std::string_view text);
/// "HH:MM" (24:00 allowed) or a plain minute count.
std::optional<int> parse_minute(std::string_view text);

namespace ca {
struct Init {
  std::string ca_dn;
  std::filesystem::path out_dir;
  int days = 3650;
};
struct Issue {
  std::filesystem::path ca_chain;
  std::string subject_dn;
  int days = 365;
  std::filesystem::path out;
};
struct Proxy {
  std::filesystem::path chain;
  std::uint32_t hours = 12;
  std::filesystem::path out;
};
}  // namespace ca

using CaCommand = std::variant<ca::Init, ca::Issue, ca::Proxy>;

/// Init writes <out_dir>/ca.chain and ca.chain.key; Issue and Proxy write <out> and <out>.key.
/// Exit 1 on an expired parent chain or malformed DN, 2 on I/O failure.
ToolResult run_ca(const CaCommand& cmd, UtcTime now, Rng& rng);

}  // namespace saz
