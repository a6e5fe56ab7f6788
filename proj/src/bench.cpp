#include "twinface/bench.hpp"

#include <chrono>
#include <cstdio>
#include <thread>

#include "twinface/batch.hpp"
#include "twinface/recognition.hpp"
#include "twinface/respond.hpp"

namespace twinface {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// Initiator and responder parties on a loopback pair, responder served on a thread.
class Bench2pc {
 public:
  Bench2pc(const KeyMaterial& keys, RandomSource& rng)
      : initiator_(keys.params, keys.pk, keys.share(1), rng),
        responder_(keys.params, keys.pk, keys.share(2), rng) {
    std::tie(a_, b_) = make_loopback_pair();
    server_ = std::thread([this] { serve_protocol(*b_, responder_); });
  }
  ~Bench2pc() {
    a_->close();
    server_.join();
  }

  Party& initiator() { return initiator_; }
  Party& responder() { return responder_; }
  Connection& conn() { return *a_; }

 private:
  Party initiator_;
  Party responder_;
  std::shared_ptr<Connection> a_;
  std::shared_ptr<Connection> b_;
  std::thread server_;
};

std::vector<Ciphertext> random_inputs(const Party& p, std::size_t n, RandomSource& rng) {
  std::vector<Ciphertext> out;
  out.reserve(n);
  BigInt bound = pow2(p.params().ell);
  for (std::size_t i = 0; i < n; ++i) {
    BigInt x = random_below(rng, 2 * bound - 1) - (bound - 1);
    out.push_back(p.encrypt_signed(x));
  }
  return out;
}

BenchRow row_from(std::string suite, std::string op, std::size_t size, double ms,
                  const SessionCounters& c) {
  return BenchRow{std::move(suite),
                  std::move(op),
                  size,
                  ms,
                  c.frames_sent + c.frames_received,
                  c.bytes_sent + c.bytes_received,
                  c.ciphertexts_sent + c.ciphertexts_received};
}

void prepare_pools(Bench2pc& b, const KeyMaterial& keys, RandomSource& rng, PoolTargets t) {
  auto init_pool = std::make_shared<RandomnessPool>(keys.pk, keys.params, rng, t);
  init_pool->fill();
  b.initiator().set_pool(init_pool);
}

}  // namespace

std::string format_bench_row(const BenchRow& r) {
  char ms[32];
  std::snprintf(ms, sizeof(ms), "%.3f", r.wall_ms);
  return r.suite + "," + r.op + "," + std::to_string(r.size) + "," + ms + "," +
         std::to_string(r.frames) + "," + std::to_string(r.bytes) + "," +
         std::to_string(r.ciphertexts);
}

std::vector<BenchRow> bench_protocols(const KeyMaterial& keys, std::span<const std::size_t> sizes,
                                      RandomSource& rng, const BenchOptions& options) {
  std::vector<BenchRow> rows;
  for (std::size_t size : sizes) {
    {
      Bench2pc b(keys, rng);
      auto xs = random_inputs(b.initiator(), size, rng);
      if (options.offline) prepare_pools(b, keys, rng, PoolTargets{size, 0, 0, 0, 4});
      Session s(b.conn(), "bench");
      auto t0 = Clock::now();
      batch_square(s, b.initiator(), xs);
      rows.push_back(row_from("protocols", "batch_square", size, ms_since(t0), s.counters()));
    }
    {
      Bench2pc b(keys, rng);
      auto xs = random_inputs(b.initiator(), size, rng);
      if (options.offline) prepare_pools(b, keys, rng, PoolTargets{size, 0, 0, 0, 4});
      Session s(b.conn(), "bench");
      auto t0 = Clock::now();
      naive_square(s, b.initiator(), xs);
      rows.push_back(row_from("protocols", "naive_square", size, ms_since(t0), s.counters()));
    }
    {
      Bench2pc b(keys, rng);
      auto xs = random_inputs(b.initiator(), size, rng);
      auto ys = random_inputs(b.initiator(), size, rng);
      if (options.offline) prepare_pools(b, keys, rng, PoolTargets{0, size, 0, 0, 4});
      Session s(b.conn(), "bench");
      auto t0 = Clock::now();
      batch_smul(s, b.initiator(), xs, ys);
      rows.push_back(row_from("protocols", "batch_smul", size, ms_since(t0), s.counters()));
    }
  }
  return rows;
}

std::vector<BenchRow> bench_pipeline(const KeyMaterial& keys, std::span<const std::size_t> sizes,
                                     RandomSource& rng, const BenchOptions& options) {
  std::vector<BenchRow> rows;
  for (std::size_t size : sizes) {
    PlainDatabase db;
    for (std::size_t i = 0; i < size; ++i) {
      db.ids.push_back("row" + std::to_string(i));
      std::vector<std::int64_t> v(options.dimension);
      for (auto& x : v) x = static_cast<std::int64_t>(rng.next_u64() % 10001);
      db.rows.push_back(std::move(v));
    }
    std::vector<std::int64_t> probe = db.rows.empty() ? std::vector<std::int64_t>(options.dimension)
                                                       : db.rows.front();
    ShardPair shards = encrypt_database(keys.pk, keys.params, db, rng);
    Party s1(keys.params, keys.pk, keys.share(1), rng);
    Party s2(keys.params, keys.pk, keys.share(2), rng);
    if (options.offline) {
      for (auto* p : {&s1, &s2}) {
        std::size_t own = p == &s1 ? shards.s1.rows.size() : shards.s2.rows.size();
        auto pool = std::make_shared<RandomnessPool>(
            keys.pk, keys.params, rng, PoolTargets::for_recognitions(1, own, options.dimension));
        pool->fill();
        p->set_pool(pool);
      }
    }
    Ciphertext eps = encrypt(keys.pk, pow2(keys.params.ell) - 1, rng);
    LocalTwin twin(s1, s2, std::move(shards), eps);
    ClientProbe cp = make_probe(keys.pk, keys.params, probe, rng, "bench");
    auto t0 = Clock::now();
    twin.run(cp.request);
    BenchRow r = row_from("pipeline", "recognition", size, ms_since(t0), twin.last_counters());
    rows.push_back(r);
  }
  return rows;
}

std::string bench_reference_notes() {
  return "# reference (published, different hardware): batch_square 1000 -> 60 ms; "
         "batch_square 10000 -> 304 ms\n";
}

}  // namespace twinface
