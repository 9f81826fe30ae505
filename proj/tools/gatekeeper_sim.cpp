#include <CLI11.hpp>

#include <iostream>
#include <sstream>

#include "saz/error.hpp"
#include "saz/gatekeeper.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Gatekeeper simulator: SAZ callout, then grid-mapfile, then run the job"};
  std::string mapfile, saz_addr, proxy, anchors;
  std::vector<std::string> command;
  app.add_option("--mapfile", mapfile, "grid-mapfile")->required();
  app.add_option("--saz", saz_addr, "SAZ server HOST:PORT")->required();
  app.add_option("--proxy", proxy, "user proxy chain (key at PATH.key)")->required();
  app.add_option("--anchors", anchors, "trusted CA certificates")->required();
  app.add_option("command", command, "job command after --")->required();
  CLI11_PARSE(app, argc, argv);

  try {
    saz::GatekeeperConfig config{
        .mapfile = saz::parse_mapfile(saz::to_string(saz::read_file(mapfile))),
        .saz_server = saz::parse_endpoint(saz_addr),
        .trust_anchors = saz::read_chain_file(anchors),
    };
    auto result = saz::submit_job({proxy, command}, config);
    if (auto* ok = std::get_if<saz::Accepted>(&result)) {
      std::cout << "GATEKEEPER: ACCEPTED user=" << ok->local_user << '\n';
      std::istringstream lines(ok->command_output);
      for (std::string line; std::getline(lines, line);) std::cout << ok->local_user << "| " << line << '\n';
      return 0;
    }
    const auto& rej = std::get<saz::Rejected>(result);
    std::cout << "GATEKEEPER: REJECTED stage=" << saz::stage_name(rej.stage) << " reason=" << rej.reason
              << '\n';
    return 1;
  } catch (const saz::Error& e) {
    std::cerr << "gatekeeper-sim: " << e.what() << '\n';
    return 2;
  }
}
