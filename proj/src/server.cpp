#include "saz/server.hpp"

#include <signal.h>

#include <condition_variable>
#include <iostream>
#include <mutex>
#include <thread>

#include "saz/error.hpp"

namespace saz {

DecisionMessage saz_handler(const VerifiedIdentity& peer, const PolicyStore& store, UtcTime) {
  return {store.is_allowed(peer.base_dn) ? Verdict::Yes : Verdict::No};
}

DecisionMessage time_handler(const VerifiedIdentity& peer, const PolicyStore& store, UtcTime now) {
  for (const auto& w : store.windows_for(peer.base_dn))
    if (w.contains(now)) return {Verdict::Yes};
  return {Verdict::No};
}

HandlerRegistry HandlerRegistry::with(const std::set<std::string>& enabled) {
  HandlerRegistry reg;
  for (const auto& name : enabled) {
    if (name == "SAZ")
      reg.add(name, saz_handler);
    else if (name == "TIME")
      reg.add(name, time_handler);
    else
      throw Error(Errc::InvalidArgument, "unknown handler '" + name + "'");
  }
  return reg;
}

const Handler* HandlerRegistry::find(std::string_view op_name) const {
  auto it = handlers_.find(op_name);
  return it == handlers_.end() ? nullptr : &it->second;
}

std::string format_log_line(const ConnectionLog& log) {
  std::string line = format_rfc3339(log.ts);
  line += '\t';
  line += log.peer ? serialize_dn(*log.peer) : "-";
  line += '\t';
  line += log.op ? *log.op : "-";
  line += '\t';
  line += log.verdict ? std::string(verdict_text(*log.verdict)) : "CLOSED";
  line += '\t';
  line += log.reason;
  line += '\t';
  line += std::to_string(log.elapsed.count());
  return line;
}

ConnectionLog handle_connection(Stream& conn, const ConnectionEnv& env) {
  const auto started = std::chrono::steady_clock::now();
  ConnectionLog log;
  log.ts = env.clock();
  try {
    auto hello = receive_token<ClientHello>(conn);
    auto [s1, pending] = respond(hello, env.server_chain, env.trust_anchors, env.clock(), env.rng);
    send_token(conn, s1);
    auto ctx = finish_accept(std::move(pending), receive_token<ClientAuth>(conn));
    log.peer = ctx.peer().base_dn;

    auto body = receive_protected(conn, ctx);
    auto request = decode_as<OperationRequest>(body);
    log.op = request.op_name;
    const Handler* handler = env.registry.find(request.op_name);
    if (!handler) throw Error(Errc::UnknownOperation, request.op_name);

    std::string delegation;
    if (request.delegate) {
      auto key = delegate_request(env.rng);
      send_protected(conn, ctx, DelegationRequest{key.verifying_key()});
      auto response = decode_as<DelegationResponse>(receive_protected(conn, ctx));
      try {
        accept_delegation(ctx, key, response.proxy, env.trust_anchors, env.clock());
        delegation = ";delegation=ok";
      } catch (const Error& e) {
        delegation = ";delegation=" + std::string(errc_name(e.code()));
      }
    }

    auto decision = (*handler)(ctx.peer(), env.store, env.clock());
    send_protected(conn, ctx, decision);
    log.verdict = decision.verdict;
    log.reason = "ok" + delegation;
  } catch (const Error& e) {
    log.error = e.code();
    log.reason = std::string(errc_name(e.code()));
    if (e.cause()) log.reason += "(" + std::string(errc_name(*e.cause())) + ")";
  } catch (const std::exception& e) {
    log.reason = "InternalError";
  }
  conn.close();
  log.elapsed = std::chrono::duration_cast<std::chrono::microseconds>(
      std::chrono::steady_clock::now() - started);
  return log;
}

struct Server::State : std::enable_shared_from_this<Server::State> {
  ServerConfig config;
  PolicyStore store;
  HandlerRegistry registry;
  Listener listener;

  std::mutex mu;
  std::condition_variable cv;
  std::size_t active = 0;
  bool stopping = false;
  std::thread acceptor;
  std::mutex log_mu;
  std::atomic<std::size_t> handled{0};

  State(ServerConfig cfg)
      : config(std::move(cfg)),
        store(PolicyStore::open(config.store_path, PolicyStore::Mode::ReadOnly)),
        registry(HandlerRegistry::with(config.enabled_handlers)),
        listener(config.listen) {
    if (config.max_connections == 0) throw Error(Errc::InvalidArgument, "max_connections must be >= 1");
  }

  void emit(const ConnectionLog& log) {
    if (config.log) {
      config.log(log);
      return;
    }
    std::lock_guard lock(log_mu);
    std::cerr << format_log_line(log) << '\n';
  }
};

Server::Server(ServerConfig config) : state_(std::make_shared<State>(std::move(config))) {}

std::size_t Server::connections_handled() const noexcept { return state_->handled.load(); }

Server::~Server() { stop(); }

Endpoint Server::local_endpoint() const { return state_->listener.local_endpoint(); }

void Server::reload_store() { state_->store.reload(); }

void Server::start() {
  auto* st = state_.get();
  st->acceptor = std::thread([st] {
    while (true) {
      {
        std::unique_lock lock(st->mu);
        st->cv.wait(lock, [&] { return st->stopping || st->active < st->config.max_connections; });
        if (st->stopping) return;
      }
      int fd = st->listener.accept_fd(std::chrono::milliseconds{50});
      if (fd < 0) continue;
      {
        std::lock_guard lock(st->mu);
        ++st->active;
      }
      // connection threads share ownership so State outlives their final unlock
      std::thread([self = st->shared_from_this(), fd] {
        auto* st = self.get();
        FdStream conn(fd, st->config.io_timeout);
        SystemRng rng;
        ConnectionEnv env{st->config.server_chain, st->config.trust_anchors, st->store,
                          st->registry, st->config.clock, rng};
        auto log = handle_connection(conn, env);
        st->emit(log);
        ++st->handled;
        std::lock_guard lock(st->mu);
        --st->active;
        st->cv.notify_all();
      }).detach();
    }
  });
}

void Server::stop() {
  if (!state_) return;
  auto* st = state_.get();
  {
    std::lock_guard lock(st->mu);
    st->stopping = true;
  }
  st->cv.notify_all();
  if (st->acceptor.joinable()) st->acceptor.join();
  st->listener.close();
  std::unique_lock lock(st->mu);
  st->cv.wait(lock, [&] { return st->active == 0; });
}

int run(ServerConfig config) {
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  sigaddset(&signals, SIGHUP);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  std::unique_ptr<Server> server;
  try {
    server = std::make_unique<Server>(std::move(config));
  } catch (const Error& e) {
    std::cerr << "saz-server: " << e.what() << '\n';
    return 1;
  }
  server->start();
  std::cerr << "saz-server: listening on " << server->local_endpoint().to_string() << '\n';

  while (true) {
    int sig = 0;
    if (sigwait(&signals, &sig) != 0) continue;
    if (sig == SIGHUP) {
      try {
        server->reload_store();
        std::cerr << "saz-server: store reloaded\n";
      } catch (const Error& e) {
        std::cerr << "saz-server: reload failed, keeping previous state: " << e.what() << '\n';
      }
      continue;
    }
    break;
  }
  server->stop();
  return 0;
}

}  // namespace saz
