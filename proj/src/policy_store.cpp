#include "saz/policy_store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>
#include <mutex>
#include <shared_mutex>

#include "saz/credential.hpp"
#include "saz/error.hpp"

namespace saz {
namespace {

template <class... Fs>
struct overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

std::string escape_note(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\\': out += "\\\\"; break;
      default: out += c;
    }
  }
  return out;
}

[[noreturn]] void corrupt(const std::string& what) { throw Error(Errc::CorruptJournal, what); }

std::string unescape_note(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\') {
      out += s[i];
      continue;
    }
    if (++i >= s.size()) corrupt("dangling escape in note");
    switch (s[i]) {
      case 't': out += '\t'; break;
      case 'n': out += '\n'; break;
      case '\\': out += '\\'; break;
      default: corrupt("invalid escape in note");
    }
  }
  return out;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find('\t', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

int parse_int(std::string_view s) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size() || s[0] == '+' ||
      (s.size() > 1 && s[0] == '0'))
    corrupt("bad integer '" + std::string(s) + "'");
  return v;
}

UtcTime parse_ts(std::string_view s) {
  auto t = parse_rfc3339(s);
  if (!t) corrupt("bad timestamp '" + std::string(s) + "'");
  return *t;
}

DistinguishedName parse_dn_field(std::string_view s) {
  try {
    return parse_dn(s);
  } catch (const Error& e) {
    corrupt(e.what());
  }
}

TimeWindow parse_window(std::string_view d, std::string_view s, std::string_view e) {
  try {
    return TimeWindow::make(parse_int(d), parse_int(s), parse_int(e));
  } catch (const Error& err) {
    if (err.code() == Errc::CorruptJournal) throw;
    corrupt(err.what());
  }
}

std::string window_fields(const TimeWindow& w) {
  return std::to_string(w.day) + '\t' + std::to_string(w.start_minute) + '\t' +
         std::to_string(w.end_minute);
}

void write_all_fd(int fd, std::string_view data) {
  std::size_t off = 0;
  while (off < data.size()) {
    auto n = ::write(fd, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(Errc::StorageFailure, std::string("write: ") + std::strerror(errno));
    }
    off += static_cast<std::size_t>(n);
  }
}

void sync_dir(const std::filesystem::path& dir) {
  int fd = ::open(dir.empty() ? "." : dir.c_str(), O_RDONLY | O_DIRECTORY | O_CLOEXEC);
  if (fd >= 0) {
    ::fsync(fd);
    ::close(fd);
  }
}

std::string read_text(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) return {};
  try {
    return to_string(read_file(path));
  } catch (const Error& e) {
    throw Error(Errc::StorageFailure, e.what());
  }
}

}  // namespace

TimeWindow TimeWindow::make(int day, int start_minute, int end_minute) {
  if (day < 0 || day > 6) throw Error(Errc::InvalidArgument, "day must be 0..6");
  if (start_minute < 0 || end_minute > 1440 || start_minute >= end_minute)
    throw Error(Errc::InvalidArgument, "window must satisfy 0 <= start < end <= 1440");
  return TimeWindow{day, start_minute, end_minute};
}

bool TimeWindow::contains(UtcTime t) const {
  auto minute = utc_minute_of_day(t);
  return utc_weekday(t) == day && start_minute <= minute && minute < end_minute;
}

std::string format_record(const JournalRecord& rec) {
  return std::visit(
      overloaded{
          [](const journal::Allow& r) {
            return "ALLOW\t" + serialize_dn(r.dn) + '\t' + format_rfc3339(r.ts) + '\t' +
                   escape_note(r.note) + '\n';
          },
          [](const journal::Revoke& r) {
            return "REVOKE\t" + serialize_dn(r.dn) + '\t' + format_rfc3339(r.ts) + '\n';
          },
          [](const journal::WindowAdd& r) {
            return "WADD\t" + serialize_dn(r.dn) + '\t' + window_fields(r.window) + '\t' +
                   format_rfc3339(r.ts) + '\n';
          },
          [](const journal::WindowRemove& r) {
            return "WDEL\t" + serialize_dn(r.dn) + '\t' + window_fields(r.window) + '\t' +
                   format_rfc3339(r.ts) + '\n';
          },
      },
      rec);
}

JournalRecord parse_record(std::string_view line) {
  auto f = split_tabs(line);
  const auto kind = f[0];
  if (kind == "ALLOW" && f.size() == 4)
    return journal::Allow{parse_dn_field(f[1]), parse_ts(f[2]), unescape_note(f[3])};
  if (kind == "REVOKE" && f.size() == 3) return journal::Revoke{parse_dn_field(f[1]), parse_ts(f[2])};
  if (kind == "WADD" && f.size() == 6)
    return journal::WindowAdd{parse_dn_field(f[1]), parse_window(f[2], f[3], f[4]), parse_ts(f[5])};
  if (kind == "WDEL" && f.size() == 6)
    return journal::WindowRemove{parse_dn_field(f[1]), parse_window(f[2], f[3], f[4]),
                                 parse_ts(f[5])};
  corrupt("unrecognized record");
}

void StoreState::apply(const JournalRecord& rec) {
  std::visit(overloaded{
                 [&](const journal::Allow& r) {
                   allowed.insert_or_assign(serialize_dn(r.dn), AllowRecord{r.dn, r.ts, r.note});
                 },
                 [&](const journal::Revoke& r) { allowed.erase(serialize_dn(r.dn)); },
                 [&](const journal::WindowAdd& r) {
                   windows[serialize_dn(r.dn)].insert_or_assign(r.window, r.ts);
                 },
                 [&](const journal::WindowRemove& r) {
                   auto it = windows.find(serialize_dn(r.dn));
                   if (it == windows.end()) return;
                   it->second.erase(r.window);
                   if (it->second.empty()) windows.erase(it);
                 },
             },
             rec);
}

StoreState fold_journal(std::string_view text) {
  StoreState state;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    ++line_no;
    auto end = text.find('\n', start);
    if (end == std::string_view::npos)
      throw Error(Errc::CorruptJournal, "line " + std::to_string(line_no) + ": missing newline",
                  std::nullopt, line_no);
    try {
      state.apply(parse_record(text.substr(start, end - start)));
    } catch (const Error& e) {
      throw Error(Errc::CorruptJournal, "line " + std::to_string(line_no) + ": " + e.what(),
                  std::nullopt, line_no);
    }
    start = end + 1;
  }
  return state;
}

std::vector<JournalRecord> minimal_records(const StoreState& state) {
  std::vector<JournalRecord> out;
  for (const auto& [_, rec] : state.allowed) out.push_back(journal::Allow{rec.dn, rec.added_at, rec.note});
  for (const auto& [key, windows] : state.windows) {
    auto dn = parse_dn(key);
    for (const auto& [w, ts] : windows) out.push_back(journal::WindowAdd{dn, w, ts});
  }
  return out;
}

struct PolicyStore::Impl {
  std::filesystem::path path;
  Mode mode = Mode::ReadOnly;
  int lock_fd = -1;
  int append_fd = -1;
  mutable std::shared_mutex state_mu;
  std::mutex write_mu;
  StoreState state;

  ~Impl() {
    if (append_fd >= 0) ::close(append_fd);
    if (lock_fd >= 0) ::close(lock_fd);  // releases the flock
  }

  void open_append() {
    if (append_fd >= 0) ::close(append_fd);
    append_fd = ::open(path.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
    if (append_fd < 0)
      throw Error(Errc::StorageFailure, "open " + path.string() + ": " + std::strerror(errno));
  }

  void require_writable() const {
    if (mode != Mode::ReadWrite) throw Error(Errc::StorageFailure, "store opened read-only");
  }

  // Appends one record durably, then publishes it. On failure the journal is truncated back.
  void commit(const JournalRecord& rec) {
    require_writable();
    std::lock_guard write_lock(write_mu);
    struct stat st {};
    if (::fstat(append_fd, &st) != 0)
      throw Error(Errc::StorageFailure, std::string("fstat: ") + std::strerror(errno));
    try {
      write_all_fd(append_fd, format_record(rec));
      if (::fdatasync(append_fd) != 0)
        throw Error(Errc::StorageFailure, std::string("fdatasync: ") + std::strerror(errno));
    } catch (...) {
      [[maybe_unused]] int rc = ::ftruncate(append_fd, st.st_size);
      throw;
    }
    std::unique_lock lock(state_mu);
    state.apply(rec);
  }
};

PolicyStore::PolicyStore(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}
PolicyStore::PolicyStore(PolicyStore&&) noexcept = default;
PolicyStore& PolicyStore::operator=(PolicyStore&&) noexcept = default;
PolicyStore::~PolicyStore() = default;

PolicyStore PolicyStore::open(const std::filesystem::path& path, Mode mode) {
  auto impl = std::make_unique<Impl>();
  impl->path = path;
  impl->mode = mode;
  if (mode == Mode::ReadWrite) {
    auto lock_path = path;
    lock_path += ".lock";
    impl->lock_fd = ::open(lock_path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (impl->lock_fd < 0)
      throw Error(Errc::StorageFailure, "open " + lock_path.string() + ": " + std::strerror(errno));
    if (::flock(impl->lock_fd, LOCK_EX | LOCK_NB) != 0)
      throw Error(Errc::StorageFailure, "store is locked by another writer");
  }
  impl->state = fold_journal(read_text(path));
  if (mode == Mode::ReadWrite) impl->open_append();
  return PolicyStore(std::move(impl));
}

void PolicyStore::add_dn(const DistinguishedName& dn, std::string_view note, UtcTime ts) {
  impl_->commit(journal::Allow{dn, ts, std::string(note)});
}

void PolicyStore::revoke_dn(const DistinguishedName& dn, UtcTime ts) {
  impl_->require_writable();
  if (!is_allowed(dn)) return;
  impl_->commit(journal::Revoke{dn, ts});
}

bool PolicyStore::is_allowed(const DistinguishedName& dn) const {
  std::shared_lock lock(impl_->state_mu);
  return impl_->state.allowed.contains(serialize_dn(dn));
}

void PolicyStore::add_window(const DistinguishedName& dn, TimeWindow window, UtcTime ts) {
  window = TimeWindow::make(window.day, window.start_minute, window.end_minute);
  impl_->commit(journal::WindowAdd{dn, window, ts});
}

void PolicyStore::remove_window(const DistinguishedName& dn, TimeWindow window, UtcTime ts) {
  impl_->require_writable();
  {
    std::shared_lock lock(impl_->state_mu);
    auto it = impl_->state.windows.find(serialize_dn(dn));
    if (it == impl_->state.windows.end() || !it->second.contains(window)) return;
  }
  impl_->commit(journal::WindowRemove{dn, window, ts});
}

std::vector<TimeWindow> PolicyStore::windows_for(const DistinguishedName& dn) const {
  std::shared_lock lock(impl_->state_mu);
  std::vector<TimeWindow> out;
  auto it = impl_->state.windows.find(serialize_dn(dn));
  if (it != impl_->state.windows.end())
    for (const auto& [w, _] : it->second) out.push_back(w);
  return out;
}

void PolicyStore::compact() {
  impl_->require_writable();
  std::lock_guard write_lock(impl_->write_mu);
  std::string text;
  for (const auto& rec : minimal_records(snapshot())) text += format_record(rec);

  auto tmp = impl_->path;
  tmp += ".compact";
  int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) throw Error(Errc::StorageFailure, "open " + tmp.string() + ": " + std::strerror(errno));
  try {
    write_all_fd(fd, text);
    if (::fsync(fd) != 0) throw Error(Errc::StorageFailure, "fsync compacted journal");
    ::close(fd);
    fd = -1;
    if (::rename(tmp.c_str(), impl_->path.c_str()) != 0)
      throw Error(Errc::StorageFailure, std::string("rename: ") + std::strerror(errno));
  } catch (...) {
    if (fd >= 0) ::close(fd);
    std::filesystem::remove(tmp);
    throw;
  }
  sync_dir(impl_->path.parent_path());
  impl_->open_append();
}

std::vector<AllowRecord> PolicyStore::list() const {
  std::shared_lock lock(impl_->state_mu);
  std::vector<AllowRecord> out;
  out.reserve(impl_->state.allowed.size());
  for (const auto& [_, rec] : impl_->state.allowed) out.push_back(rec);
  return out;
}

StoreState PolicyStore::snapshot() const {
  std::shared_lock lock(impl_->state_mu);
  return impl_->state;
}

void PolicyStore::reload() {
  auto fresh = fold_journal(read_text(impl_->path));
  std::unique_lock lock(impl_->state_mu);
  impl_->state = std::move(fresh);
}

const std::filesystem::path& PolicyStore::path() const { return impl_->path; }
PolicyStore::Mode PolicyStore::mode() const { return impl_->mode; }

}  // namespace saz
