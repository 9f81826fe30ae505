#include <doctest.h>

#include "harness.hpp"
#include "saz/error.hpp"

using namespace saz;
using namespace saz::testing;

TEST_CASE("valid_username") {
  for (auto u : {"alice01", "_svc", "a", "cms-prod_2", "abcdefghijklmnopqrstuvwxyz012345"}) {
    CAPTURE(u);
    CHECK(valid_username(u));
  }
  for (auto u : {"", "BadUser!", "Alice", "1abc", "-x", "a b", "abcdefghijklmnopqrstuvwxyz0123456", "bob."}) {
    CAPTURE(u);
    CHECK_FALSE(valid_username(u));
  }
}

TEST_CASE("parse_mapfile") {
  SUBCASE("one entry") {
    auto m = parse_mapfile("\"/O=T/CN=alice\" alice01\n");
    CHECK(m.size() == 1);
    CHECK(m.lookup(parse_dn("/O=T/CN=alice")) == "alice01");
    CHECK_FALSE(m.lookup(parse_dn("/O=T/CN=alice/CN=proxy")).has_value());
  }
  SUBCASE("comments, blank lines, spaces in DNs, last entry wins") {
    auto m = parse_mapfile(
        "# site mapfile\n"
        "\n"
        "   \n"
        "\"/O=T/CN=Alice Smith\"   asmith\n"
        "\"/O=T/CN=bob\" bob\r\n"
        "  # indented comment\n"
        "\"/O=T/CN=bob\" robert\n");
    CHECK(m.size() == 2);
    CHECK(m.lookup(parse_dn("/O=T/CN=Alice Smith")) == "asmith");
    CHECK(m.lookup(parse_dn("/O=T/CN=bob")) == "robert");
  }
  SUBCASE("errors carry the line number") {
    struct Case {
      std::string text;
      std::size_t line;
    };
    for (const auto& c : std::vector<Case>{
             {"\"/O=T/CN=x\" BadUser!\n", 1},
             {"# ok\n/O=T/CN=x alice\n", 2},
             {"\"/O=T/CN=x alice\n", 1},
             {"\"/O=T/CN=x\"\n", 1},
             {"\"/O=T/CN=x\"alice\n", 1},
             {"\n\n\"not a dn\" alice\n", 3},
             {"\"/O=T/CN=x\" alice bob\n", 1},
         }) {
      CAPTURE(c.text);
      try {
        parse_mapfile(c.text);
        FAIL("parsed");
      } catch (const Error& e) {
        CHECK(e.code() == Errc::MalformedLine);
        CHECK(e.line() == c.line);
      }
    }
  }
}

TEST_CASE("compose truth table") {
  const std::optional<std::string> mapped = "alice01";
  const std::optional<std::string> unmapped;
  CHECK(compose(Outcome::allow(), mapped) == FinalDecision{RunAs{"alice01"}});
  CHECK(compose(Outcome::deny(), mapped) == FinalDecision{DenyAt{Stage::SAZ}});
  CHECK(compose(Outcome::allow(), unmapped) == FinalDecision{DenyAt{Stage::Mapfile}});
  CHECK(compose(Outcome::deny(), unmapped) == FinalDecision{DenyAt{Stage::SAZ}});
  for (auto k : {ErrorKind::Connect, ErrorKind::Handshake, ErrorKind::Protocol, ErrorKind::Integrity,
                 ErrorKind::Timeout}) {
    CHECK(compose(Outcome::error(k, ""), mapped) == FinalDecision{DenyAt{Stage::SAZ}});
    CHECK(compose(Outcome::error(k, ""), unmapped) == FinalDecision{DenyAt{Stage::SAZ}});
  }
}

TEST_CASE("property: compose is monotone toward deny") {
  // rank 1 is permissive: Allow, or a mapped DN
  struct Input {
    Outcome saz;
    std::optional<std::string> user;
    int saz_rank;
    int map_rank;
  };
  std::vector<Input> inputs;
  for (auto o : {Outcome::allow(), Outcome::deny(), Outcome::error(ErrorKind::Connect, ""),
                 Outcome::error(ErrorKind::Handshake, ""), Outcome::error(ErrorKind::Integrity, "")})
    for (auto u : {std::optional<std::string>("u"), std::optional<std::string>()})
      inputs.push_back({o, u, o.is_allow() ? 1 : 0, u ? 1 : 0});

  auto runs = [](const Input& in) { return std::holds_alternative<RunAs>(compose(in.saz, in.user)); };
  int run_count = 0;
  for (const auto& x : inputs) {
    if (runs(x)) ++run_count;
    for (const auto& y : inputs) {
      bool more_restrictive = y.saz_rank <= x.saz_rank && y.map_rank <= x.map_rank;
      if (more_restrictive && !runs(x)) CHECK_FALSE(runs(y));
    }
  }
  CHECK(run_count == 1);
}

TEST_CASE("run_command") {
  auto [status, out] = run_command({"sh", "-c", "echo hello; echo err >&2; exit 3"});
  CHECK(status == 3);
  CHECK(out.find("hello\n") != std::string::npos);
  CHECK(out.find("err\n") != std::string::npos);
  CHECK_THROWS_AS(run_command({"/nonexistent/binary-for-test"}), Error);
  CHECK_THROWS_AS(run_command({}), Error);
}

TEST_CASE("submit_job against a live server") {
  World w;
  w.allow("/O=Grid/CN=alice");
  w.allow("/O=Grid/CN=both");
  Server server(w.server_config());
  server.start();

  GatekeeperConfig gk{
      .mapfile = parse_mapfile("\"/O=Grid/CN=both\" both\n\"/O=Grid/CN=bob\" bob\n"),
      .saz_server = server.local_endpoint(),
      .trust_anchors = w.anchors(),
  };
  auto submit = [&](const std::string& dn) {
    auto path = w.dir / (std::to_string(std::hash<std::string>{}(dn)) + ".proxy");
    save_credentials(path, w.user(dn));
    return submit_job({path, {"echo", "job ran"}}, gk);
  };

  auto both = submit("/O=Grid/CN=both");
  REQUIRE(std::holds_alternative<Accepted>(both));
  CHECK(std::get<Accepted>(both).local_user == "both");
  CHECK(std::get<Accepted>(both).command_output == "job ran\n");
  CHECK(std::get<Accepted>(both).command_status == 0);

  auto store_only = submit("/O=Grid/CN=alice");
  REQUIRE(std::holds_alternative<Rejected>(store_only));
  CHECK(std::get<Rejected>(store_only).stage == Stage::Mapfile);
  CHECK(std::get<Rejected>(store_only).reason == "unmapped");

  auto map_only = submit("/O=Grid/CN=bob");
  REQUIRE(std::holds_alternative<Rejected>(map_only));
  CHECK(std::get<Rejected>(map_only).stage == Stage::SAZ);
  CHECK(std::get<Rejected>(map_only).reason == "NO");

  server.stop();
  auto down = submit("/O=Grid/CN=both");
  REQUIRE(std::holds_alternative<Rejected>(down));
  CHECK(std::get<Rejected>(down).stage == Stage::SAZ);
  CHECK(std::get<Rejected>(down).reason == "ERROR_Connect");

  CHECK_THROWS_AS(submit_job({w.dir / "missing.proxy", {"true"}}, gk), Error);
}
