#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "saz/client.hpp"
#include "saz/dn.hpp"

namespace saz {

/// Site-local DN -> username mapping (grid-mapfile).
class GridMapfile {
 public:
  void add(const DistinguishedName& dn, std::string user);
  std::optional<std::string> lookup(const DistinguishedName& dn) const;
  std::size_t size() const noexcept { return entries_.size(); }

 private:
  std::map<std::string, std::string> entries_;
};

bool valid_username(std::string_view user);

/// Lines of `"<serialized DN>" <username>`; blank and '#' lines ignored; last entry wins.
/// Throws Error(MalformedLine) carrying the 1-based line number.
GridMapfile parse_mapfile(std::string_view text);

enum class Stage { SAZ, Mapfile };
std::string_view stage_name(Stage s);

struct RunAs {
  std::string local_user;
  friend bool operator==(const RunAs&, const RunAs&) = default;
};
struct DenyAt {
  Stage stage;
  friend bool operator==(const DenyAt&, const DenyAt&) = default;
};
using FinalDecision = std::variant<RunAs, DenyAt>;

/// Deny-overrides: runs only when SAZ allowed and the DN is mapped. SAZ errors deny.
FinalDecision compose(const Outcome& saz, const std::optional<std::string>& local_user);

struct JobRequest {
  std::filesystem::path proxy_path;
  std::vector<std::string> command;
};

struct Accepted {
  std::string local_user;
  std::string command_output;
  int command_status = 0;
};
struct Rejected {
  Stage stage;
  std::string reason;
};
using JobResult = std::variant<Accepted, Rejected>;

struct GatekeeperConfig {
  GridMapfile mapfile;
  Endpoint saz_server;
  std::vector<Certificate> trust_anchors;
  std::chrono::seconds timeout{10};
};

/// SAZ callout first, then the mapfile, then compose; runs the command on acceptance.
/// Throws for an unreadable proxy.
JobResult submit_job(const JobRequest& req, const GatekeeperConfig& config);

/// Runs argv as a child process under the invoking user and captures stdout+stderr.
std::pair<int, std::string> run_command(const std::vector<std::string>& argv);

}  // namespace saz
