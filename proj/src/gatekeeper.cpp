#include "saz/gatekeeper.hpp"

#include <fcntl.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cctype>
#include <cstring>

#include "saz/error.hpp"

extern char** environ;

namespace saz {

void GridMapfile::add(const DistinguishedName& dn, std::string user) {
  entries_.insert_or_assign(serialize_dn(dn), std::move(user));
}

std::optional<std::string> GridMapfile::lookup(const DistinguishedName& dn) const {
  auto it = entries_.find(serialize_dn(dn));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

bool valid_username(std::string_view u) {
  // [a-z_][a-z0-9_-]{0,31}
  if (u.empty() || u.size() > 32) return false;
  if (!(std::islower(static_cast<unsigned char>(u[0])) || u[0] == '_')) return false;
  for (char c : u.substr(1)) {
    if (!(std::islower(static_cast<unsigned char>(c)) || std::isdigit(static_cast<unsigned char>(c)) ||
          c == '_' || c == '-'))
      return false;
  }
  return true;
}

GridMapfile parse_mapfile(std::string_view text) {
  GridMapfile map;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    auto first = line.find_first_not_of(" \t");
    if (first == std::string_view::npos || line[first] == '#') continue;
    line = line.substr(first);

    auto fail = [&](const std::string& why) -> Error {
      return Error(Errc::MalformedLine, "line " + std::to_string(line_no) + ": " + why,
                   std::nullopt, line_no);
    };
    if (line[0] != '"') throw fail("DN must be double-quoted");
    auto close = line.rfind('"');
    if (close == 0) throw fail("missing closing quote");
    auto dn_text = line.substr(1, close - 1);
    auto rest = line.substr(close + 1);
    auto u0 = rest.find_first_not_of(" \t");
    if (u0 == 0) throw fail("expected whitespace after DN");
    if (u0 == std::string_view::npos) throw fail("missing username");
    rest = rest.substr(u0);
    auto u1 = rest.find_last_not_of(" \t");
    auto user = rest.substr(0, u1 + 1);
    if (!valid_username(user)) throw fail("bad username '" + std::string(user) + "'");
    try {
      map.add(parse_dn(dn_text), std::string(user));
    } catch (const Error& e) {
      throw fail(e.what());
    }
  }
  return map;
}

std::string_view stage_name(Stage s) { return s == Stage::SAZ ? "SAZ" : "Mapfile"; }

FinalDecision compose(const Outcome& saz, const std::optional<std::string>& local_user) {
  if (!saz.is_allow()) return DenyAt{Stage::SAZ};
  if (!local_user) return DenyAt{Stage::Mapfile};
  return RunAs{*local_user};
}

std::pair<int, std::string> run_command(const std::vector<std::string>& argv) {
  if (argv.empty()) throw Error(Errc::InvalidArgument, "empty command");
  int pipefd[2];
  if (::pipe2(pipefd, O_CLOEXEC) != 0) throw Error(Errc::Io, "pipe failed");

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, pipefd[1], STDOUT_FILENO);
  posix_spawn_file_actions_adddup2(&actions, pipefd[1], STDERR_FILENO);

  std::vector<char*> args;
  for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);

  pid_t pid = 0;
  int rc = ::posix_spawnp(&pid, args[0], &actions, nullptr, args.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  ::close(pipefd[1]);
  if (rc != 0) {
    ::close(pipefd[0]);
    throw Error(Errc::Io, "cannot run '" + argv[0] + "': " + std::strerror(rc));
  }

  std::string output;
  char buf[4096];
  while (true) {
    auto n = ::read(pipefd[0], buf, sizeof buf);
    if (n > 0) {
      output.append(buf, static_cast<std::size_t>(n));
    } else if (n == 0 || errno != EINTR) {
      break;
    }
  }
  ::close(pipefd[0]);
  int status = 0;
  while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  int code = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
  return {code, output};
}

JobResult submit_job(const JobRequest& req, const GatekeeperConfig& config) {
  auto chain = load_credentials(req.proxy_path);
  ClientConfig client{.server = config.saz_server,
                      .chain = chain,
                      .trust_anchors = config.trust_anchors,
                      .timeout = config.timeout};
  auto outcome = authorize(client);
  auto base = extract_base_dn(chain.leaf().subject);
  // local authorization only runs once SAZ has allowed the job
  auto user = outcome.is_allow() ? config.mapfile.lookup(base) : std::nullopt;

  auto decision = compose(outcome, user);
  if (auto* deny = std::get_if<DenyAt>(&decision)) {
    std::string reason = deny->stage == Stage::SAZ
                             ? (outcome.is_deny() ? "NO" : "ERROR_" + std::string(error_kind_name(outcome.error_kind())))
                             : "unmapped";
    return Rejected{deny->stage, reason};
  }
  const auto& local_user = std::get<RunAs>(decision).local_user;
  auto [status, output] = run_command(req.command);
  return Accepted{local_user, output, status};
}

}  // namespace saz
