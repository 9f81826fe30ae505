#include <algorithm>
#include <cctype>
#include <charconv>

#include "saz/error.hpp"
#include "saz/policy_store.hpp"
#include "saz/tools.hpp"

namespace saz {
namespace {

template <class... Fs>
struct overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '\t') out += "\\t";
    else if (c == '\n') out += "\\n";
    else if (c == '\\') out += "\\\\";
    else out += c;
  }
  return out;
}

std::optional<int> parse_uint(std::string_view s) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size() || v < 0) return std::nullopt;
  return v;
}

}  // namespace

std::optional<int> parse_day(std::string_view text) {
  if (auto n = parse_uint(text)) return *n <= 6 ? n : std::nullopt;
  static constexpr std::string_view names[] = {"monday", "tuesday", "wednesday", "thursday",
                                               "friday", "saturday", "sunday"};
  if (text.size() < 3) return std::nullopt;
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (int i = 0; i < 7; ++i)
    if (names[i].substr(0, lower.size()) == lower) return i;
  return std::nullopt;
}

std::optional<int> parse_minute(std::string_view text) {
  auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    auto n = parse_uint(text);
    return n && *n <= 1440 ? n : std::nullopt;
  }
  auto h = parse_uint(text.substr(0, colon));
  auto m = parse_uint(text.substr(colon + 1));
  if (!h || !m || text.size() - colon - 1 != 2 || *m > 59) return std::nullopt;
  int total = *h * 60 + *m;
  return total <= 1440 ? std::optional<int>(total) : std::nullopt;
}

ToolResult run_admin(const AdminCommand& cmd, const std::filesystem::path& store_path, UtcTime now) {
  ToolResult result;
  try {
    auto open_rw = [&] { return PolicyStore::open(store_path, PolicyStore::Mode::ReadWrite); };
    std::visit(overloaded{
                   [&](const admin::Add& c) {
                     auto dn = parse_dn(c.dn);
                     open_rw().add_dn(dn, c.note, now);
                     result.out = "added " + serialize_dn(dn) + "\n";
                   },
                   [&](const admin::Remove& c) {
                     auto dn = parse_dn(c.dn);
                     open_rw().revoke_dn(dn, now);
                     result.out = "removed " + serialize_dn(dn) + "\n";
                   },
                   [&](const admin::List&) {
                     auto store = PolicyStore::open(store_path, PolicyStore::Mode::ReadOnly);
                     for (const auto& r : store.list())
                       result.out += serialize_dn(r.dn) + '\t' + format_rfc3339(r.added_at) +
                                     '\t' + escape(r.note) + '\n';
                   },
                   [&](const admin::WindowAdd& c) {
                     auto dn = parse_dn(c.dn);
                     auto w = TimeWindow::make(c.day, c.start_minute, c.end_minute);
                     open_rw().add_window(dn, w, now);
                     result.out = "window added for " + serialize_dn(dn) + "\n";
                   },
                   [&](const admin::WindowRemove& c) {
                     auto dn = parse_dn(c.dn);
                     auto w = TimeWindow::make(c.day, c.start_minute, c.end_minute);
                     open_rw().remove_window(dn, w, now);
                     result.out = "window removed for " + serialize_dn(dn) + "\n";
                   },
                   [&](const admin::Compact&) {
                     open_rw().compact();
                     result.out = "compacted\n";
                   },
               },
               cmd);
  } catch (const Error& e) {
    bool storage = e.code() == Errc::CorruptJournal || e.code() == Errc::StorageFailure ||
                   e.code() == Errc::Io;
    result.exit_code = storage ? 2 : 1;
    result.err = std::string("saz-admin: ") + e.what() + "\n";
  }
  return result;
}

}  // namespace saz
