#pragma once

#include <compare>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "saz/dn.hpp"
#include "saz/time.hpp"

namespace saz {

struct AllowRecord {
  DistinguishedName dn;
  UtcTime added_at;
  std::string note;
  friend bool operator==(const AllowRecord&, const AllowRecord&) = default;
};

/// [start_minute, end_minute) on one UTC day; day 0 = Monday.
struct TimeWindow {
  int day = 0;
  int start_minute = 0;
  int end_minute = 1;

  /// Throws InvalidArgument unless 0 <= day <= 6 and 0 <= start < end <= 1440.
  static TimeWindow make(int day, int start_minute, int end_minute);
  bool contains(UtcTime t) const;

  friend auto operator<=>(const TimeWindow&, const TimeWindow&) = default;
};

namespace journal {
struct Allow {
  DistinguishedName dn;
  UtcTime ts;
  std::string note;
};
struct Revoke {
  DistinguishedName dn;
  UtcTime ts;
};
struct WindowAdd {
  DistinguishedName dn;
  TimeWindow window;
  UtcTime ts;
};
struct WindowRemove {
  DistinguishedName dn;
  TimeWindow window;
  UtcTime ts;
};
}  // namespace journal

using JournalRecord =
    std::variant<journal::Allow, journal::Revoke, journal::WindowAdd, journal::WindowRemove>;

/// One LF-terminated journal line.
std::string format_record(const JournalRecord& rec);
/// Parses one line without its LF; throws Error(CorruptJournal).
JournalRecord parse_record(std::string_view line);

/// Folded store contents, keyed by serialized DN (so iteration order is list order).
struct StoreState {
  std::map<std::string, AllowRecord> allowed;
  /// Window -> timestamp of the add that created it.
  std::map<std::string, std::map<TimeWindow, UtcTime>> windows;

  void apply(const JournalRecord& rec);
  friend bool operator==(const StoreState&, const StoreState&) = default;
};

/// Folds a whole journal; throws CorruptJournal with the 1-based line number.
StoreState fold_journal(std::string_view text);
/// Minimal record sequence reproducing `state`.
std::vector<JournalRecord> minimal_records(const StoreState& state);

/// Durable allowlist and time windows over an append-only journal. Readers run concurrently;
/// mutations are serialized, appended and fsynced before they become visible. A ReadWrite
/// handle holds an exclusive lock on "<path>.lock".
class PolicyStore {
 public:
  enum class Mode { ReadOnly, ReadWrite };

  static PolicyStore open(const std::filesystem::path& path, Mode mode = Mode::ReadWrite);
  PolicyStore(PolicyStore&&) noexcept;
  PolicyStore& operator=(PolicyStore&&) noexcept;
  ~PolicyStore();

  void add_dn(const DistinguishedName& dn, std::string_view note, UtcTime ts);
  void revoke_dn(const DistinguishedName& dn, UtcTime ts);
  bool is_allowed(const DistinguishedName& dn) const;

  void add_window(const DistinguishedName& dn, TimeWindow window, UtcTime ts);
  void remove_window(const DistinguishedName& dn, TimeWindow window, UtcTime ts);
  std::vector<TimeWindow> windows_for(const DistinguishedName& dn) const;

  /// Rewrites the journal to minimal_records() through a temp file and atomic rename.
  void compact();
  std::vector<AllowRecord> list() const;
  StoreState snapshot() const;

  /// Re-reads the journal from disk. On failure the previous state is kept and the error rethrown.
  void reload();

  const std::filesystem::path& path() const;
  Mode mode() const;

 private:
  struct Impl;
  explicit PolicyStore(std::unique_ptr<Impl> impl);
  std::unique_ptr<Impl> impl_;
};

}  // namespace saz
