#include <CLI11.hpp>

#include <iostream>

#include "saz/client.hpp"
#include "saz/error.hpp"

int main(int argc, char** argv) {
  CLI::App app{"SAZ client: asks the server whether a proxy's owner may use the site"};
  std::string server, proxy, anchors, op = "SAZ";
  bool delegate = false;
  int timeout = 10;
  bool verbose = false;
  app.add_option("--server", server, "HOST:PORT")->required();
  app.add_option("--proxy", proxy, "proxy chain (key at PATH.key)")->required();
  app.add_option("--anchors", anchors, "trusted CA certificates")->required();
  app.add_option("--op", op, "operation name")->check(CLI::IsMember({"SAZ", "TIME"}));
  app.add_flag("--delegate", delegate, "delegate a proxy to the server");
  app.add_option("--timeout", timeout, "seconds")->check(CLI::PositiveNumber);
  app.add_flag("-v,--verbose", verbose, "print error details on stderr");
  CLI11_PARSE(app, argc, argv);

  saz::CalloutResult result;
  try {
    saz::ClientConfig config{
        .server = saz::parse_endpoint(server),
        .chain = saz::load_credentials(proxy),
        .trust_anchors = saz::read_chain_file(anchors),
        .op_name = op,
        .delegate = delegate,
        .timeout = std::chrono::seconds{timeout},
    };
    auto outcome = saz::authorize(config);
    if (verbose && outcome.is_error()) std::cerr << saz::describe(outcome) << '\n';
    result = saz::callout_result(outcome);
  } catch (const saz::Error& e) {
    if (verbose) std::cerr << e.what() << '\n';
    result = {2, "SAZ: ERROR Config"};
  }
  std::cout << result.status_line << std::endl;
  return result.exit_code;
}
