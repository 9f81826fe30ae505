// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and exits nonzero
// if any fails.

#include <cstdio>
#include <functional>
#include <future>
#include <iostream>
#include <random>
#include <sstream>

#include "harness.hpp"
#include "saz/error.hpp"

using namespace saz;
using namespace saz::testing;
using namespace std::chrono_literals;
using steady = std::chrono::steady_clock;

namespace {

// Pinned limits.
constexpr double kCompositionBudgetSeconds = 5.0;
constexpr double kStatelessBudgetSeconds = 10.0;
constexpr int kTamperTrials = 1000;
constexpr int kSpliceTrials = 100;
constexpr int kJournalSequences = 200;
constexpr int kRepeatedCalls = 100;
constexpr int kConcurrentClients = 50;

struct Check {
  bool pass = true;
  std::string detail;

  void expect(bool ok, const std::string& what) {
    if (!ok && pass) {
      pass = false;
      detail = what;
    }
  }
};

double seconds_since(steady::time_point t) {
  return std::chrono::duration<double>(steady::now() - t).count();
}

std::string fmt_seconds(double s) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f s", s);
  return buf;
}

Clock fixed(UtcTime t) {
  return [t] { return t; };
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

// 1. Deny-overrides composition through the gatekeeper binary.
Check composition() {
  Check v;
  auto started = steady::now();
  World w(101);
  w.allow("/O=Grid/CN=A");
  w.allow("/O=Grid/CN=AB");
  write_file(w.dir / "grid-mapfile", as_bytes("\"/O=Grid/CN=B\" userb\n\"/O=Grid/CN=AB\" userab\n"));
  write_chain_file(w.dir / "anchors", w.anchors());
  Server server(w.server_config());
  server.start();
  auto ep = server.local_endpoint().to_string();

  struct Row {
    std::string cn;
    int exit_code;
    std::string line;
  };
  const std::vector<Row> rows = {
      {"AB", 0, "GATEKEEPER: ACCEPTED user=userab"},
      {"A", 1, "GATEKEEPER: REJECTED stage=Mapfile reason=unmapped"},
      {"B", 1, "GATEKEEPER: REJECTED stage=SAZ reason=NO"},
      {"C", 1, "GATEKEEPER: REJECTED stage=SAZ reason=NO"},
  };
  int matched = 0;
  for (const auto& row : rows) {
    auto proxy = w.dir / (row.cn + ".proxy");
    save_credentials(proxy, w.user("/O=Grid/CN=" + row.cn));
    auto [status, out] = run_command({GATEKEEPER_SIM_PATH, "--mapfile", (w.dir / "grid-mapfile").string(),
                                      "--saz", ep, "--proxy", proxy.string(), "--anchors",
                                      (w.dir / "anchors").string(), "--", "echo", "job"});
    bool ok = status == row.exit_code && first_line(out) == row.line;
    if (ok) ++matched;
    v.expect(ok, "DN_" + row.cn + ": exit " + std::to_string(status) + " '" + first_line(out) + "'");
  }
  server.stop();
  auto elapsed = seconds_since(started);
  v.expect(elapsed < kCompositionBudgetSeconds, "took " + fmt_seconds(elapsed));
  if (v.pass) v.detail = std::to_string(matched) + "/4 rows, " + fmt_seconds(elapsed);
  return v;
}

// 2. Byte-exact protected decision followed by an orderly close.
Check script_conformance() {
  Check v;
  World w(102);
  w.allow("/O=Grid/CN=alice");
  auto store = PolicyStore::open(w.store_path, PolicyStore::Mode::ReadOnly);
  auto cfg = w.server_config();

  const Bytes yes = {0x22, 0x00, 0x00, 0x00, 0x03, 'Y', 'E', 'S'};
  const Bytes no = {0x22, 0x00, 0x00, 0x00, 0x02, 'N', 'O'};
  int ok_runs = 0;
  for (auto [cn, expected, outcome] : {std::tuple{"alice", yes, Outcome::allow()},
                                       std::tuple{"bob", no, Outcome::deny()}}) {
    auto ex = exchange(w.client_config(w.user(std::string("/O=Grid/CN=") + cn)), cfg, store, 2);
    auto frames = split_frames(ex.server_wrote);
    bool shape = frames.size() == 2;
    ProtectedMessage last;
    if (shape) {
      try {
        last = decode_as<ProtectedMessage>(frames.back());
      } catch (const std::exception&) {
        shape = false;
      }
    }
    // the client side stream reached end of input after the decision: log shows a clean finish
    bool closed = ex.log.verdict.has_value() && ex.log.reason == "ok" && !ex.log.error;
    bool ok = shape && last.body == expected && ex.outcome == outcome && closed;
    v.expect(ok, std::string(cn) + ": " + describe(ex.outcome) + " body=" + to_hex(last.body));
    if (ok) ++ok_runs;
  }
  if (v.pass) v.detail = std::to_string(ok_runs) + "/2";
  return v;
}

// 3. One flipped bit in a random post-handshake frame, either direction.
Check tamper() {
  Check v;
  World w(103);
  w.allow("/O=Grid/CN=alice");
  auto store = PolicyStore::open(w.store_path, PolicyStore::Mode::ReadOnly);
  auto cfg = w.server_config();
  auto alice = w.user("/O=Grid/CN=alice");
  auto bob = w.user("/O=Grid/CN=bob");
  std::mt19937_64 gen(0x7a3e);

  int detected = 0, client_side = 0, server_side = 0;
  for (int trial = 0; trial < kTamperTrials; ++trial) {
    auto c = w.client_config(gen() % 2 ? alice : bob);
    c.delegate = gen() % 2;
    // Post-handshake frames. Client: [2] request, [3] delegation response.
    // Server: [1] decision, or [1] delegation request and [2] decision.
    bool hit_server = gen() % 2;
    std::size_t frame = hit_server ? 1 + (c.delegate ? gen() % 2 : 0) : 2 + (c.delegate ? gen() % 2 : 0);
    std::size_t bit = gen();
    std::pair<std::size_t, std::size_t> target{frame, bit};
    auto ex = hit_server ? exchange(c, cfg, store, gen(), target) : exchange(c, cfg, store, gen(), {}, target);

    bool ok;
    if (hit_server) {
      ok = ex.outcome == Outcome::error(ErrorKind::Integrity, "");
      ++client_side;
    } else {
      ok = ex.log.error == Errc::IntegrityFailure && ex.outcome.is_error();
      ++server_side;
    }
    if (ok) ++detected;
    v.expect(ok, "trial " + std::to_string(trial) + ": " + describe(ex.outcome) + " / " + ex.log.reason);
  }
  std::ostringstream detail;
  detail << detected << "/" << kTamperTrials << " detected (" << client_side << " at client, "
         << server_side << " at server)";
  if (v.pass) v.detail = detail.str();
  return v;
}

// 4. Same answers across repetition, restart and concurrency.
Check statelessness() {
  Check v;
  auto started = steady::now();
  World w(104);
  std::vector<CredentialChain> users;
  std::vector<Outcome> serial;
  for (int i = 0; i < 10; ++i) {
    auto dn = "/O=Grid/CN=user" + std::to_string(i);
    if (i % 2 == 0) w.allow(dn);
    users.push_back(w.user(dn));
  }
  auto cfg = w.server_config();
  auto server = std::make_unique<Server>(cfg);
  server->start();
  cfg.listen = server->local_endpoint();

  std::vector<Outcome> repeated;
  for (int i = 0; i < kRepeatedCalls; ++i) {
    if (i == kRepeatedCalls / 2) {
      server.reset();
      server = std::make_unique<Server>(cfg);
      server->start();
    }
    repeated.push_back(authorize(w.client_config(users[0], cfg.listen)));
  }
  bool identical = std::all_of(repeated.begin(), repeated.end(),
                               [](const Outcome& o) { return o == Outcome::allow(); });
  v.expect(identical, "repeated calls diverged");

  for (const auto& u : users) serial.push_back(authorize(w.client_config(u, cfg.listen)));
  std::vector<std::future<Outcome>> futures;
  for (int i = 0; i < kConcurrentClients; ++i)
    futures.push_back(std::async(std::launch::async, [&, i] {
      return authorize(w.client_config(users[i % users.size()], cfg.listen));
    }));
  int agree = 0;
  for (int i = 0; i < kConcurrentClients; ++i) {
    auto o = futures[i].get();
    if (o == serial[i % users.size()]) ++agree;
    v.expect(o == serial[i % users.size()], "client " + std::to_string(i) + ": " + describe(o));
  }
  for (std::size_t i = 0; i < users.size(); ++i)
    v.expect(serial[i] == (i % 2 == 0 ? Outcome::allow() : Outcome::deny()), "serial baseline wrong");
  server->stop();
  auto elapsed = seconds_since(started);
  v.expect(elapsed < kStatelessBudgetSeconds, "took " + fmt_seconds(elapsed));
  if (v.pass)
    v.detail = std::to_string(kRepeatedCalls) + " identical across restart, " + std::to_string(agree) + "/" +
               std::to_string(kConcurrentClients) + " concurrent match serial, " + fmt_seconds(elapsed);
  return v;
}

// 5. Both sides authenticate; S1 chain substitution is caught.
Check mutual_auth() {
  Check v;
  World w(105);
  w.allow("/O=Grid/CN=alice");
  auto store = PolicyStore::open(w.store_path, PolicyStore::Mode::ReadOnly);
  auto cfg = w.server_config();
  auto alice = w.user("/O=Grid/CN=alice");

  auto rogue = make_ca("/O=Grid/OU=Test CA", w.rng);
  auto bad_client = exchange(w.client_config(issue_proxy(rogue, "/O=Grid/CN=alice", w.rng)), cfg, store, 1);
  v.expect(bad_client.log.error == Errc::BadClientChain && !bad_client.outcome.is_allow(),
           "untrusted client: " + bad_client.log.reason);

  auto rogue_server = cfg;
  rogue_server.server_chain = issue_user(rogue, "/O=Grid/CN=saz.example.org", w.rng);
  auto bad_server = exchange(w.client_config(alice), rogue_server, store, 2);
  v.expect(bad_server.outcome == Outcome::error(ErrorKind::Handshake, ""),
           "untrusted server: " + describe(bad_server.outcome));

  std::mt19937_64 gen(0x5b1ce);
  int rejected = 0;
  auto anchors = w.anchors();
  for (int trial = 0; trial < kSpliceTrials; ++trial) {
    SeededRng rng(gen());
    auto [c1, pending] = initiate(alice, rng);
    auto [s1, _] = respond(c1, w.server_chain, anchors, system_now(), rng);
    auto other = issue_user(w.ca, "/O=Grid/CN=mitm" + std::to_string(gen() % 1000), rng);
    auto spliced = s1;
    spliced.server_chain = other.certs;
    try {
      finish_initiate(std::move(pending), spliced, anchors, system_now());
      v.expect(false, "splice accepted in trial " + std::to_string(trial));
    } catch (const Error& e) {
      v.expect(e.code() == Errc::BadServerSignature,
               "splice trial " + std::to_string(trial) + ": " + std::string(errc_name(e.code())));
      ++rejected;
    }
  }
  if (v.pass) v.detail = "client CA, server CA, splice " + std::to_string(rejected) + "/" + std::to_string(kSpliceTrials);
  return v;
}

// 6. TIME operation with an injected clock. 2024-01-01 is a Monday.
Check time_windows() {
  Check v;
  World w(106);
  {
    auto rw = PolicyStore::open(w.store_path);
    rw.add_window(parse_dn("/O=Grid/CN=A"), TimeWindow::make(0, 9 * 60, 17 * 60), kEpochStart);
  }
  auto store = PolicyStore::open(w.store_path, PolicyStore::Mode::ReadOnly);
  auto a = w.user("/O=Grid/CN=A");
  auto other = w.user("/O=Grid/CN=nowindows");
  struct Row {
    const CredentialChain* chain;
    UtcTime at;
    Outcome expected;
    std::string label;
  };
  const std::vector<Row> rows = {
      {&a, make_utc(2024, 1, 1, 12), Outcome::allow(), "Mon 12:00"},
      {&a, make_utc(2024, 1, 1, 17), Outcome::deny(), "Mon 17:00"},
      {&a, make_utc(2024, 1, 2, 12), Outcome::deny(), "Tue 12:00"},
      {&other, make_utc(2024, 1, 1, 12), Outcome::deny(), "no windows"},
  };
  int matched = 0;
  for (const auto& row : rows) {
    auto c = w.client_config(*row.chain);
    c.op_name = "TIME";
    auto ex = exchange(c, w.server_config(fixed(row.at)), store, 6);
    if (ex.outcome == row.expected) ++matched;
    v.expect(ex.outcome == row.expected, row.label + ": " + describe(ex.outcome));
  }
  if (v.pass) v.detail = std::to_string(matched) + "/4";
  return v;
}

// 7. Reopen and compact preserve the folded state.
Check journal_determinism() {
  Check v;
  std::mt19937_64 gen(0x10a7);
  const std::vector<std::string> names = {"/O=G/CN=a", "/O=G/CN=b", "/O=G/CN=c d", "/O=G/OU=x\\/y/CN=e",
                                          "/DC=org/DC=site/CN=f"};
  const std::vector<std::string> notes = {"", "ticket 7", "tab\there", "two\nlines", "back\\slash"};
  auto listing = [](const PolicyStore& s) {
    std::string out;
    for (const auto& r : s.list()) out += serialize_dn(r.dn) + '\t' + format_rfc3339(r.added_at) + '\t' + r.note + '\n';
    return out;
  };
  int good = 0;
  for (int seq = 0; seq < kJournalSequences; ++seq) {
    TempDir dir;
    auto path = dir / "journal";
    StoreState before;
    std::string before_list;
    {
      auto store = PolicyStore::open(path);
      int ops = 1 + static_cast<int>(gen() % 80);
      for (int i = 0; i < ops; ++i) {
        auto dn = parse_dn(names[gen() % names.size()]);
        auto ts = kEpochStart + std::chrono::seconds(gen() % 100000000);
        int day = static_cast<int>(gen() % 7);
        int start = static_cast<int>(gen() % 1440);
        int end = start + 1 + static_cast<int>(gen() % (1440 - start));
        switch (gen() % 6) {
          case 0:
          case 1: store.add_dn(dn, notes[gen() % notes.size()], ts); break;
          case 2: store.revoke_dn(dn, ts); break;
          case 3: store.add_window(dn, TimeWindow::make(day, start, end), ts); break;
          case 4: store.remove_window(dn, TimeWindow::make(day, start, end), ts); break;
          case 5:
            if (!store.windows_for(dn).empty()) store.remove_window(dn, store.windows_for(dn).front(), ts);
            break;
        }
      }
      before = store.snapshot();
      before_list = listing(store);
    }
    auto reopened = PolicyStore::open(path);
    bool ok = reopened.snapshot() == before && listing(reopened) == before_list;
    reopened.compact();
    ok = ok && reopened.snapshot() == before && listing(reopened) == before_list;
    auto after_compact = PolicyStore::open(path, PolicyStore::Mode::ReadOnly);
    ok = ok && after_compact.snapshot() == before && listing(after_compact) == before_list;
    if (ok) ++good;
    v.expect(ok, "sequence " + std::to_string(seq) + " diverged");
  }
  if (v.pass) v.detail = std::to_string(good) + "/" + std::to_string(kJournalSequences) + " sequences";
  return v;
}

// 8. Exit codes and status lines of the client binary.
Check callout_contract() {
  Check v;
  World w(108);
  w.allow("/O=Grid/CN=alice");
  write_chain_file(w.dir / "anchors", w.anchors());
  save_credentials(w.dir / "alice.proxy", w.user("/O=Grid/CN=alice"));
  save_credentials(w.dir / "bob.proxy", w.user("/O=Grid/CN=bob"));
  auto server = std::make_unique<Server>(w.server_config());
  server->start();
  auto ep = server->local_endpoint().to_string();

  auto call = [&](const std::string& proxy) {
    return run_command({SAZ_CLIENT_PATH, "--server", ep, "--proxy", (w.dir / proxy).string(), "--anchors",
                        (w.dir / "anchors").string(), "--timeout", "3"});
  };
  int matched = 0;
  auto check = [&](const std::pair<int, std::string>& got, int code, const std::string& line,
                   const std::string& label) {
    bool ok = got.first == code && got.second == line + "\n";
    if (ok) ++matched;
    v.expect(ok, label + ": exit " + std::to_string(got.first) + " '" + first_line(got.second) + "'");
  };
  check(call("alice.proxy"), 0, "SAZ: YES", "allowed");
  check(call("bob.proxy"), 1, "SAZ: NO", "absent");
  server.reset();
  check(call("alice.proxy"), 2, "SAZ: ERROR Connect", "stopped");
  if (v.pass) v.detail = std::to_string(matched) + "/3";
  return v;
}

// 9. Unknown operation: close, no decision frame, client error not deny.
Check unknown_operation() {
  Check v;
  World w(109);
  w.allow("/O=Grid/CN=alice");
  auto store = PolicyStore::open(w.store_path, PolicyStore::Mode::ReadOnly);
  auto c = w.client_config(w.user("/O=Grid/CN=alice"));
  c.op_name = "FROB";
  auto ex = exchange(c, w.server_config(), store, 9);
  auto frames = split_frames(ex.server_wrote);
  bool no_decision = std::none_of(frames.begin(), frames.end(), [](const Bytes& f) {
    return !f.empty() && (f[0] == tag::Protected || f[0] == tag::Decision);
  });
  v.expect(frames.size() == 1 && no_decision, std::to_string(frames.size()) + " server frames");
  v.expect(ex.outcome == Outcome::error(ErrorKind::Protocol, ""), describe(ex.outcome));
  v.expect(!ex.outcome.is_deny(), "mapped to deny");
  if (v.pass) v.detail = "server wrote ServerAuth only, client " + describe(ex.outcome);
  return v;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Check()>>> criteria = {
      {"composition truth table", composition},
      {"protocol script conformance", script_conformance},
      {"tamper suite", tamper},
      {"statelessness", statelessness},
      {"mutual authentication", mutual_auth},
      {"TIME handler", time_windows},
      {"journal determinism", journal_determinism},
      {"callout contract", callout_contract},
      {"unknown operation", unknown_operation},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Check v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    if (!v.pass) ++failures;
    std::cout << (v.pass ? "PASS" : "FAIL") << " [" << i + 1 << "] " << criteria[i].first << ": " << v.detail
              << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
