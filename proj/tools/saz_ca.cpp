#include <CLI11.hpp>

#include <iostream>

#include "saz/tools.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Test CA: CA creation, user certificates and proxies"};
  app.require_subcommand(1);

  saz::ca::Init init;
  auto* init_cmd = app.add_subcommand("init", "create a self-signed CA");
  init_cmd->add_option("--dn", init.ca_dn, "CA subject DN")->required();
  init_cmd->add_option("--out", init.out_dir, "output directory")->required();
  init_cmd->add_option("--days", init.days, "validity in days");

  saz::ca::Issue issue;
  auto* issue_cmd = app.add_subcommand("issue", "issue an end-entity certificate");
  issue_cmd->add_option("--ca", issue.ca_chain, "CA chain (key at PATH.key)")->required();
  issue_cmd->add_option("--dn", issue.subject_dn, "subject DN")->required();
  issue_cmd->add_option("--out", issue.out, "output chain path")->required();
  issue_cmd->add_option("--days", issue.days, "validity in days");

  saz::ca::Proxy proxy;
  auto* proxy_cmd = app.add_subcommand("proxy", "derive a proxy from a chain");
  proxy_cmd->add_option("--chain", proxy.chain, "parent chain (key at PATH.key)")->required();
  proxy_cmd->add_option("--out", proxy.out, "output chain path")->required();
  proxy_cmd->add_option("--hours", proxy.hours, "lifetime in hours");
  CLI11_PARSE(app, argc, argv);

  saz::CaCommand cmd = init;
  if (issue_cmd->parsed()) cmd = issue;
  if (proxy_cmd->parsed()) cmd = proxy;

  saz::SystemRng rng;
  auto result = saz::run_ca(cmd, saz::system_now(), rng);
  std::cout << result.out;
  std::cerr << result.err;
  return result.exit_code;
}
