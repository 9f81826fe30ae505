#include <CLI11.hpp>

#include <iostream>
#include <sstream>

#include "saz/error.hpp"
#include "saz/server.hpp"

int main(int argc, char** argv) {
  CLI::App app{"SAZ authorization server"};
  std::string listen, store, chain, key, anchors, handlers = "SAZ";
  std::size_t max_conns = 64;
  app.add_option("--listen", listen, "HOST:PORT to listen on")->required();
  app.add_option("--store", store, "policy journal")->required();
  app.add_option("--chain", chain, "server credential chain")->required()->check(CLI::ExistingFile);
  app.add_option("--key", key, "server private key")->required()->check(CLI::ExistingFile);
  app.add_option("--anchors", anchors, "trusted CA certificates")->required()->check(CLI::ExistingFile);
  app.add_option("--handlers", handlers, "comma-separated operations (SAZ,TIME)");
  app.add_option("--max-conns", max_conns, "concurrent connection limit")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  try {
    saz::ServerConfig config{
        .listen = saz::parse_endpoint(listen),
        .server_chain = saz::load_credentials(chain, key),
        .trust_anchors = saz::read_chain_file(anchors),
        .store_path = store,
        .enabled_handlers = {},
        .max_connections = max_conns,
    };
    std::stringstream ss(handlers);
    for (std::string h; std::getline(ss, h, ',');)
      if (!h.empty()) config.enabled_handlers.insert(h);
    return saz::run(std::move(config));
  } catch (const saz::Error& e) {
    std::cerr << "saz-server: " << e.what() << '\n';
    return 1;
  }
}
