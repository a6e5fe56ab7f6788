#include "twinface/server.hpp"

#include <condition_variable>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <thread>

#include "twinface/error.hpp"
#include "twinface/logging.hpp"
#include "twinface/respond.hpp"
#include "twinface/wire.hpp"

namespace twinface {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

struct LocalMinSlot {
  bool claimed = false;  // S1 has a request thread for this id
  bool ready = false;
  std::optional<Ciphertext> value;
  std::optional<std::string> error;
};

void try_send(const std::shared_ptr<Connection>& conn, Envelope env) {
  if (!conn) return;
  try {
    conn->send(env);
  } catch (const TransportError&) {
  }
}

Envelope error_envelope(const std::string& session, const std::string& message) {
  nlohmann::json p;
  p["message"] = message;
  return Envelope{session, "error", std::move(p)};
}

}  // namespace

struct TwinServer::State : std::enable_shared_from_this<TwinServer::State> {
  State(ServerOptions o, ParamSet params, PublicKey pk, KeyShare share, EncryptedShard sh,
        std::optional<Ciphertext> eps, RandomSource& rng)
      : opt(std::move(o)),
        party(params, pk, std::move(share), rng),
        shard(std::move(sh)),
        epsilon(std::move(eps)) {}

  ServerOptions opt;
  Party party;
  std::shared_ptr<RandomnessPool> pool;

  std::shared_mutex shard_mutex;
  EncryptedShard shard;
  std::optional<Ciphertext> epsilon;

  std::shared_ptr<Transcript> transcript;
  std::unique_ptr<TcpListener> listener;

  mutable std::mutex mutex;
  std::condition_variable cv;
  std::shared_ptr<Connection> peer;
  std::vector<std::weak_ptr<Connection>> connections;
  std::map<std::string, LocalMinSlot> localmins;                  // S1
  std::map<std::string, std::weak_ptr<Connection>> waiting;        // S2: request id -> client
  bool stopping = false;
  bool stopped = false;
  std::size_t active = 0;
  ServerStats stats;
  std::thread accept_thread;

  std::string name() const { return to_string(opt.role); }

  template <typename F>
  void spawn(F&& f) {
    {
      std::lock_guard lock(mutex);
      if (stopping) return;
      ++active;
    }
    std::thread([self = shared_from_this(), f = std::forward<F>(f)]() mutable {
      try {
        f();
      } catch (const std::exception& e) {
        log::error(std::string("worker failed: ") + e.what());
      }
      {
        std::lock_guard lock(self->mutex);
        --self->active;
      }
      self->cv.notify_all();
    }).detach();
  }

  void track(const std::shared_ptr<Connection>& conn, const std::string& label) {
    if (transcript) conn->set_transcript(transcript, name() + "|" + label);
    std::lock_guard lock(mutex);
    std::erase_if(connections, [](const auto& w) { return w.expired(); });
    connections.push_back(conn);
  }

  // --- connections ------------------------------------------------------

  void accept_loop() {
    while (auto conn = listener->accept()) {
      spawn([self = shared_from_this(), conn] { self->handshake(conn); });
    }
  }

  void handshake(const std::shared_ptr<Connection>& conn) {
    track(conn, "inbound");
    auto hello = conn->recv_inbound();
    if (!hello) return;
    std::string role = hello->step == "hello" ? hello->payload.value("role", std::string()) : "";
    if (role == "client") {
      client_loop(conn);
    } else if (role == "s2" && opt.role == ServerRole::s1) {
      log::info("peer s2 connected");
      attach_peer(conn);
      peer_loop(conn);
    } else {
      try_send(conn, error_envelope(hello->session, "expected hello from a client or s2"));
      conn->close();
    }
  }

  void connect_loop() {
    auto [host, port] = split_host_port(opt.peer);
    while (true) {
      {
        std::lock_guard lock(mutex);
        if (stopping) return;
      }
      std::shared_ptr<Connection> conn;
      try {
        conn = tcp_connect_retry(host, port, opt.peer_wait);
      } catch (const TransportError& e) {
        log::error("cannot reach s1 at " + opt.peer + ": " + e.what());
        std::unique_lock lock(mutex);
        if (cv.wait_for(lock, std::chrono::seconds(1), [&] { return stopping; })) return;
        continue;
      }
      track(conn, "peer");
      nlohmann::json p;
      p["role"] = "s2";
      try_send(conn, Envelope{"hello", "hello", p});
      log::info("connected to s1 at " + opt.peer);
      attach_peer(conn);
      peer_loop(conn);
      std::unique_lock lock(mutex);
      if (cv.wait_for(lock, std::chrono::milliseconds(200), [&] { return stopping; })) return;
    }
  }

  void attach_peer(const std::shared_ptr<Connection>& conn) {
    std::shared_ptr<Connection> old;
    {
      std::lock_guard lock(mutex);
      old = std::exchange(peer, conn);
    }
    cv.notify_all();
    if (old) old->close();
  }

  std::shared_ptr<Connection> wait_peer() {
    std::unique_lock lock(mutex);
    if (!cv.wait_for(lock, opt.peer_wait, [&] { return stopping || (peer && !peer->is_closed()); }) ||
        stopping) {
      throw TransportError("peer server is not connected");
    }
    return peer;
  }

  void peer_loop(const std::shared_ptr<Connection>& conn) {
    while (auto env = conn->recv_inbound()) {
      if (is_protocol_request(env->step)) {
        try_send(conn, respond(party, *env));
      } else if (env->step == "localmin" && opt.role == ServerRole::s1) {
        on_localmin(*env);
      } else if (env->step == "mask" && opt.role == ServerRole::s2) {
        on_mask(*env);
      } else if (env->step == "abort") {
        on_abort(*env);
      } else {
        try_send(conn, error_envelope(env->session, "unexpected step '" + env->step + "'"));
      }
    }
    peer_lost(conn);
  }

  void peer_lost(const std::shared_ptr<Connection>& conn) {
    std::map<std::string, std::weak_ptr<Connection>> orphaned;
    {
      std::lock_guard lock(mutex);
      if (peer != conn) return;
      peer = nullptr;
      orphaned.swap(waiting);
      for (auto& [id, slot] : localmins) {
        if (!slot.ready) {
          slot.ready = true;
          slot.error = "peer connection lost";
        }
      }
    }
    cv.notify_all();
    log::warn("peer connection lost");
    for (auto& [id, client] : orphaned) {
      try_send(client.lock(), error_envelope(id, "peer server connection lost"));
    }
  }

  void client_loop(const std::shared_ptr<Connection>& conn) {
    while (auto env = conn->recv_inbound()) {
      if (env->step == "probe") {
        spawn([self = shared_from_this(), conn, env = std::move(*env)] {
          self->handle_probe(conn, env);
        });
      } else {
        try_send(conn, error_envelope(env->session, "unexpected step '" + env->step + "'"));
      }
    }
  }

  // --- recognition --------------------------------------------------------

  void handle_probe(const std::shared_ptr<Connection>& client, const Envelope& env) {
    std::string id = env.payload.value("request_id", std::string());
    if (id.empty() || id != env.session) {
      try_send(client, error_envelope(env.session, "probe request_id must name the session"));
      return;
    }
    {
      std::lock_guard lock(mutex);
      ++stats.requests_started;
    }
    log::debug("request " + id + " started");
    auto t0 = Clock::now();
    try {
      if (opt.role == ServerRole::s1) {
        run_s1(id, env.payload);
      } else {
        run_s2(id, client, env.payload);
      }
      std::lock_guard lock(mutex);
      ++stats.requests_completed;
      log::info("request " + id + " finished its " + name() + " part in " +
                std::to_string(static_cast<long>(ms_since(t0))) + "ms");
    } catch (const std::exception& e) {
      std::shared_ptr<Connection> peer_conn;
      {
        std::lock_guard lock(mutex);
        ++stats.requests_failed;
        localmins.erase(id);
        waiting.erase(id);
        peer_conn = peer;
      }
      log::warn("request " + id + " failed: " + e.what());
      nlohmann::json p;
      p["request_id"] = id;
      p["message"] = e.what();
      try_send(peer_conn, Envelope{id, "abort", p});
      try_send(client, error_envelope(id, e.what()));
    }
  }

  std::optional<Ciphertext> own_minimum(Connection& conn, std::span<const Ciphertext> probe) {
    std::shared_lock lock(shard_mutex);
    if (!shard.rows.empty() && probe.size() != shard.dimension) {
      throw DimensionError("probe has " + std::to_string(probe.size()) +
                           " values, the shard has " + std::to_string(shard.dimension));
    }
    auto distances = squared_distances(conn, party, shard, probe, opt.lanes);
    return local_min(conn, party, distances);
  }

  void run_s1(const std::string& id, const nlohmann::json& payload) {
    auto probe = ct_list_field(party.pk(), payload, "p_ct");
    Ciphertext mask = ct_field(party.pk(), payload, "r_ct");
    {
      std::lock_guard lock(mutex);
      auto& slot = localmins[id];
      if (slot.claimed) throw ProtocolError("duplicate request id");
      slot.claimed = true;
    }
    auto conn = wait_peer();
    std::optional<Ciphertext> m1 = own_minimum(*conn, probe);
    std::optional<Ciphertext> m2 = wait_localmin(id);
    Ciphertext gamma = final_min(*conn, party, m1, m2, *epsilon);
    MaskedResult m = mask_result(party, gamma, mask);
    nlohmann::json p;
    p["request_id"] = id;
    p["c"] = ct_json(m.masked);
    p["c1"] = to_hex(m.partial.value);
    conn->send(Envelope{id, "mask", p});
  }

  std::optional<Ciphertext> wait_localmin(const std::string& id) {
    std::unique_lock lock(mutex);
    bool ok = cv.wait_for(lock, opt.request_timeout, [&] {
      auto it = localmins.find(id);
      return stopping || it == localmins.end() || it->second.ready;
    });
    auto it = localmins.find(id);
    if (!ok || stopping || it == localmins.end()) {
      throw TransportError("no local minimum from the peer server");
    }
    LocalMinSlot slot = std::move(it->second);
    localmins.erase(it);
    if (slot.error) throw ProtocolError("peer server: " + *slot.error);
    return slot.value;
  }

  void on_localmin(const Envelope& env) {
    std::string id = env.payload.value("request_id", std::string());
    LocalMinSlot update;
    update.ready = true;
    try {
      auto d = env.payload.find("d");
      if (d == env.payload.end()) throw ProtocolError("localmin lacks 'd'");
      if (!d->is_null()) update.value = ct_from_json(party.pk(), *d);
    } catch (const std::exception& e) {
      update.error = e.what();
    }
    {
      std::lock_guard lock(mutex);
      auto& slot = localmins[id];
      slot.ready = true;
      slot.value = std::move(update.value);
      slot.error = std::move(update.error);
    }
    cv.notify_all();
  }

  void on_abort(const Envelope& env) {
    std::string id = env.payload.value("request_id", std::string());
    std::string message = env.payload.value("message", std::string("aborted"));
    std::shared_ptr<Connection> client;
    {
      std::lock_guard lock(mutex);
      if (opt.role == ServerRole::s1) {
        auto it = localmins.find(id);
        if (it != localmins.end()) {
          it->second.ready = true;
          it->second.error = message;
        }
      } else {
        auto it = waiting.find(id);
        if (it != waiting.end()) {
          client = it->second.lock();
          waiting.erase(it);
        }
      }
    }
    cv.notify_all();
    try_send(client, error_envelope(id, "peer server: " + message));
  }

  void run_s2(const std::string& id, const std::shared_ptr<Connection>& client,
              const nlohmann::json& payload) {
    auto probe = ct_list_field(party.pk(), payload, "p_ct");
    {
      std::lock_guard lock(mutex);
      if (!waiting.emplace(id, client).second) throw ProtocolError("duplicate request id");
    }
    auto conn = wait_peer();
    std::optional<Ciphertext> m2 = own_minimum(*conn, probe);
    nlohmann::json p;
    p["request_id"] = id;
    p["d"] = m2 ? ct_json(*m2) : nlohmann::json(nullptr);
    conn->send(Envelope{id, "localmin", p});
  }

  void on_mask(const Envelope& env) {
    std::string id = env.payload.value("request_id", std::string());
    std::shared_ptr<Connection> client;
    {
      std::lock_guard lock(mutex);
      auto it = waiting.find(id);
      if (it != waiting.end()) {
        client = it->second.lock();
        waiting.erase(it);
      }
    }
    if (!client) {
      log::warn("mask for unknown or departed request " + id);
      return;
    }
    try {
      MaskedResult m{ct_field(party.pk(), env.payload, "c"),
                     PartialCiphertext{ct_field(party.pk(), env.payload, "c1").value,
                                       party.peer_share_index()}};
      nlohmann::json p;
      p["request_id"] = id;
      p["masked"] = to_hex(release_masked(party, m));
      try_send(client, Envelope{id, "result", p});
    } catch (const std::exception& e) {
      log::warn("request " + id + " failed at release: " + e.what());
      try_send(client, error_envelope(id, e.what()));
    }
  }
};

TwinServer::TwinServer(ServerOptions options, ParamSet params, PublicKey pk, KeyShare share,
                       EncryptedShard shard, std::optional<Ciphertext> epsilon_ct,
                       RandomSource& rng) {
  if (shard.owner != options.role) {
    throw ParameterError("shard belongs to " + to_string(shard.owner) + ", server role is " +
                         to_string(options.role));
  }
  if (options.role == ServerRole::s1 && !epsilon_ct) {
    throw ParameterError("s1 needs the encrypted threshold");
  }
  if (options.role == ServerRole::s2 && options.peer.empty()) {
    throw ParameterError("s2 needs the address of s1");
  }
  if (share.index != (options.role == ServerRole::s1 ? 1 : 2)) {
    throw ParameterError("role " + to_string(options.role) + " needs key share " +
                         std::to_string(options.role == ServerRole::s1 ? 1 : 2));
  }
  state_ = std::make_shared<State>(std::move(options), params, std::move(pk), std::move(share),
                                   std::move(shard), std::move(epsilon_ct), rng);
  auto& s = *state_;
  if (s.opt.pool && s.opt.pool_recognitions > 0) {
    auto targets = PoolTargets::for_recognitions(s.opt.pool_recognitions, s.shard.rows.size(),
                                                 s.shard.dimension);
    s.pool = std::make_shared<RandomnessPool>(s.party.pk(), s.party.params(), rng, targets);
    s.party.set_pool(s.pool);
  }
  if (!s.opt.transcript_path.empty()) {
    s.transcript = std::make_shared<Transcript>(s.opt.transcript_path);
  }
}

TwinServer::~TwinServer() { stop(); }

void TwinServer::start() {
  auto& s = *state_;
  auto [host, port] = split_host_port(s.opt.listen);
  s.listener = std::make_unique<TcpListener>(host, port);
  log::info(s.name() + " listening on " + host + ":" + std::to_string(s.listener->port()) +
            " (" + describe(s.party.params()) + ", " + std::to_string(s.shard.rows.size()) +
            " rows)");
  if (s.pool) s.pool->start_background();
  s.accept_thread = std::thread([st = state_] { st->accept_loop(); });
  if (s.opt.role == ServerRole::s2) {
    s.spawn([st = state_] { st->connect_loop(); });
  }
}

void TwinServer::stop() {
  if (!state_) return;
  auto& s = *state_;
  std::vector<std::weak_ptr<Connection>> conns;
  {
    std::lock_guard lock(s.mutex);
    if (s.stopped) return;
    s.stopping = true;
    conns = s.connections;
  }
  s.cv.notify_all();
  if (s.listener) s.listener->shutdown();
  if (s.accept_thread.joinable()) s.accept_thread.join();
  for (auto& w : conns) {
    if (auto c = w.lock()) c->close();
  }
  if (s.pool) s.pool->stop_background();
  {
    std::unique_lock lock(s.mutex);
    s.cv.wait(lock, [&] { return s.active == 0; });
    s.stopped = true;
  }
  s.cv.notify_all();
  log::info(s.name() + " stopped");
}

void TwinServer::wait() {
  auto& s = *state_;
  std::unique_lock lock(s.mutex);
  s.cv.wait(lock, [&] { return s.stopped; });
}

std::uint16_t TwinServer::port() const {
  return state_->listener ? state_->listener->port() : 0;
}

bool TwinServer::peer_connected() const {
  std::lock_guard lock(state_->mutex);
  return state_->peer && !state_->peer->is_closed();
}

ServerStats TwinServer::stats() const {
  std::lock_guard lock(state_->mutex);
  return state_->stats;
}

void TwinServer::replace_shard(EncryptedShard shard) {
  if (shard.owner != state_->opt.role) throw ParameterError("shard belongs to the other server");
  std::unique_lock lock(state_->shard_mutex);
  state_->shard = std::move(shard);
}

void TwinServer::append_rows(std::vector<EncryptedRow> rows) {
  std::unique_lock lock(state_->shard_mutex);
  auto& shard = state_->shard;
  for (const auto& r : rows) {
    if (shard.dimension == 0 && shard.rows.empty()) shard.dimension = r.values.size();
    if (r.values.size() != shard.dimension) throw DimensionError("appended row has wrong width");
  }
  for (auto& r : rows) shard.rows.push_back(std::move(r));
}

}  // namespace twinface
