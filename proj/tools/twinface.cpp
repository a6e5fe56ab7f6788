// twinface: organization tool, server daemon, client and benchmark harness.

#include <csignal>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <pthread.h>
#include <thread>

#include <CLI11.hpp>

#include "twinface/bench.hpp"
#include "twinface/client.hpp"
#include "twinface/error.hpp"
#include "twinface/key_io.hpp"
#include "twinface/logging.hpp"
#include "twinface/server.hpp"
#include "twinface/shard_io.hpp"

namespace fs = std::filesystem;
using namespace twinface;

namespace {

constexpr int kExitReject = 1;
constexpr int kExitError = 2;

struct KeygenArgs {
  std::size_t kappa = 128;
  std::size_t modulus_bits = 0;
  std::size_t sigma = 0;
  std::size_t ell = 0;
  std::string profile;
  std::string out = ".";
  bool force = false;
};

struct EnrollArgs {
  std::string db;
  std::string pk;
  std::optional<double> epsilon;
  std::optional<std::int64_t> epsilon_raw;
  std::string out = ".";
  std::int64_t scale = 10000;
  bool force = false;
};

struct ServerArgs {
  std::string role;
  std::string listen;
  std::string peer;
  std::string pk;
  std::string share;
  std::string shard;
  std::string epsilon_ct;
  std::size_t lanes = 1;
  std::size_t pool_recognitions = 32;
  bool no_pool = false;
  std::string transcript;
};

struct ClientArgs {
  std::string probe;
  std::size_t row = 0;
  std::string id;
  std::string s1 = "127.0.0.1:7101";
  std::string s2 = "127.0.0.1:7102";
  std::optional<double> epsilon;
  std::optional<std::int64_t> epsilon_raw;
  std::string pk;
  std::int64_t scale = 10000;
};

struct BenchArgs {
  std::string suite = "protocols";
  std::vector<std::size_t> sizes{1000};
  std::string out;
  std::string profile = "toy";
  std::size_t dimension = 512;
  bool online = false;
  std::uint64_t seed = 0;
};

ParamSet profile_params(const std::string& name) {
  if (name == "standard") return ParamSet::standard();
  if (name == "toy") return ParamSet::toy();
  if (name == "toy_wide") return ParamSet::toy_wide();
  throw ParameterError("unknown profile '" + name + "' (standard, toy, toy_wide)");
}

// Real Euclidean threshold in feature units -> squared quantized distance.
BigInt epsilon_units(const std::optional<double>& real, const std::optional<std::int64_t>& raw,
                     std::int64_t scale) {
  if (raw) {
    if (*raw <= 0) throw ParameterError("--epsilon-raw must be positive");
    return BigInt(static_cast<long>(*raw));
  }
  if (!real) throw ParameterError("one of --epsilon or --epsilon-raw is required");
  if (!(*real > 0)) throw ParameterError("--epsilon must be positive");
  double v = std::round(*real * static_cast<double>(scale) * *real * static_cast<double>(scale));
  return BigInt(static_cast<long>(v));
}

int run_keygen(const KeygenArgs& a) {
  ParamSet params = a.profile.empty()
                        ? ParamSet::from_kappa(a.kappa, a.modulus_bits, a.sigma, a.ell)
                        : profile_params(a.profile);
  params.validate();
  log::info("generating keys: " + describe(params));
  KeyMaterial keys = keygen(params, system_random());
  write_key_files(a.out, keys, a.force);
  std::cout << "wrote pk.json, sk.json, share1.json, share2.json to " << a.out << "\n";
  return 0;
}

int run_enroll(const EnrollArgs& a) {
  LoadedPublicKey pk = load_public_key(a.pk);
  FeatureTable table = load_feature_csv(a.db);
  PlainDatabase db = quantize_table(table, QuantizationSpec{a.scale});
  BigInt eps = epsilon_units(a.epsilon, a.epsilon_raw, a.scale);
  if (eps >= pow2(pk.params.ell)) throw ParameterError("epsilon does not fit below 2^ell");
  ShardPair shards = encrypt_database(pk.pk, pk.params, db, system_random(), std::nullopt, a.scale);
  Ciphertext eps_ct = encrypt(pk.pk, eps, system_random());
  fs::path out(a.out);
  fs::create_directories(out);
  write_text_file(out / "s1_shard.json", shard_json(shards.s1) + "\n", a.force);
  write_text_file(out / "s2_shard.json", shard_json(shards.s2) + "\n", a.force);
  write_text_file(out / "epsilon_ct.json", epsilon_json(eps_ct) + "\n", a.force);
  write_text_file(out / "ids.json", ids_json(db.ids) + "\n", a.force);
  std::cout << "enrolled " << db.rows.size() << " rows (" << shards.s2.rows.size() << " to s2, "
            << shards.s1.rows.size() << " to s1), epsilon " << eps.get_str() << " squared units\n";
  return 0;
}

int run_server(const ServerArgs& a) {
  ServerOptions opt;
  opt.role = parse_role(a.role);
  opt.listen = a.listen.empty() ? (opt.role == ServerRole::s1 ? "127.0.0.1:7101" : "127.0.0.1:7102")
                                : a.listen;
  opt.peer = a.peer.empty() && opt.role == ServerRole::s2 ? "127.0.0.1:7101" : a.peer;
  opt.lanes = a.lanes;
  opt.pool = !a.no_pool;
  opt.pool_recognitions = a.pool_recognitions;
  opt.transcript_path = a.transcript;

  LoadedPublicKey pk = load_public_key(a.pk);
  KeyShare share = load_share(a.share, pk);
  EncryptedShard shard = load_shard(a.shard, pk.pk);
  std::optional<Ciphertext> eps;
  if (!a.epsilon_ct.empty()) eps = load_epsilon(a.epsilon_ct, pk.pk);

  // Signals are taken synchronously by one thread so shutdown runs outside a handler.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  TwinServer server(opt, pk.params, pk.pk, share, std::move(shard), eps);
  server.start();
  std::cout << "listening " << server.port() << std::endl;
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    log::info("signal " + std::to_string(sig) + ", shutting down");
    server.stop();
  });
  server.wait();
  // Wake the signal thread if stop came from elsewhere.
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  return 0;
}

int run_client(const ClientArgs& a) {
  LoadedPublicKey pk = load_public_key(a.pk);
  FeatureTable table = load_feature_csv(a.probe);
  std::size_t row = a.row;
  if (!a.id.empty()) {
    auto it = std::find(table.ids.begin(), table.ids.end(), a.id);
    if (it == table.ids.end()) throw FormatError("probe file has no row with id '" + a.id + "'");
    row = static_cast<std::size_t>(it - table.ids.begin());
  }
  if (row >= table.values.size()) throw FormatError("probe file has no row " + std::to_string(row));
  auto probe = quantize_vector(table.values[row], QuantizationSpec{a.scale});
  BigInt eps = epsilon_units(a.epsilon, a.epsilon_raw, a.scale);
  ClientOptions opt;
  opt.s1 = a.s1;
  opt.s2 = a.s2;
  RecognitionOutcome out = recognize_remote(opt, pk.params, pk.pk, probe, eps);
  std::cout << "request_id " << out.request_id << "\n"
            << "gamma " << out.gamma.get_str() << "\n"
            << "accepted " << (out.accepted ? "true" : "false") << "\n";
  return out.accepted ? 0 : kExitReject;
}

int run_bench(const BenchArgs& a) {
  ParamSet params = profile_params(a.profile);
  std::unique_ptr<RandomSource> rng;
  if (a.seed != 0) {
    rng = std::make_unique<SeededRandom>(a.seed);
  }
  RandomSource& r = rng ? *rng : system_random();
  KeyMaterial keys = keygen(params, r);
  BenchOptions opt;
  opt.offline = !a.online;
  opt.dimension = a.dimension;
  std::vector<BenchRow> rows;
  if (a.suite == "protocols") {
    rows = bench_protocols(keys, a.sizes, r, opt);
  } else if (a.suite == "pipeline") {
    rows = bench_pipeline(keys, a.sizes, r, opt);
  } else {
    throw ParameterError("unknown suite '" + a.suite + "' (protocols, pipeline)");
  }
  std::string text = std::string(kBenchHeader) + "\n";
  for (const auto& row : rows) text += format_bench_row(row) + "\n";
  text += "# params: " + describe(params) + (opt.offline ? ", offline blinds" : ", online blinds") + "\n";
  if (a.suite == "protocols") text += bench_reference_notes();
  if (a.out.empty()) {
    std::cout << text;
  } else {
    write_text_file(a.out, text, true);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Twin-server encrypted face matching"};
  app.require_subcommand(1);

  auto* org = app.add_subcommand("org", "Organization: keys and enrollment");
  org->require_subcommand(1);

  KeygenArgs kg;
  auto* keygen_cmd = org->add_subcommand("keygen", "Generate threshold key files");
  keygen_cmd->add_option("--kappa", kg.kappa, "Security parameter");
  keygen_cmd->add_option("--modulus-bits", kg.modulus_bits, "Bit length of N (default 8*kappa)");
  keygen_cmd->add_option("--sigma", kg.sigma, "Statistical parameter (default kappa)");
  keygen_cmd->add_option("--ell", kg.ell, "Plaintext bound exponent (default min(40, sigma/2))");
  keygen_cmd->add_option("--profile", kg.profile, "Named parameters: standard, toy, toy_wide");
  keygen_cmd->add_option("--out", kg.out, "Output directory");
  keygen_cmd->add_flag("--force", kg.force, "Overwrite existing key files");

  EnrollArgs en;
  auto* enroll_cmd = org->add_subcommand("enroll", "Encrypt and split a feature database");
  enroll_cmd->add_option("--db", en.db, "Feature CSV (id,v1,...,vn)")->required();
  enroll_cmd->add_option("--pk", en.pk, "Public key file")->required();
  auto* eps_real = enroll_cmd->add_option("--epsilon", en.epsilon,
                                          "Threshold as a Euclidean distance in feature units");
  auto* eps_raw = enroll_cmd->add_option("--epsilon-raw", en.epsilon_raw,
                                         "Threshold in squared quantized-distance units");
  eps_real->excludes(eps_raw);
  enroll_cmd->add_option("--out", en.out, "Output directory");
  enroll_cmd->add_option("--scale", en.scale, "Quantization scale");
  enroll_cmd->add_flag("--force", en.force, "Overwrite existing files");

  ServerArgs sv;
  auto* server_cmd = app.add_subcommand("server", "Run an S1 or S2 daemon");
  server_cmd->add_option("--role", sv.role, "s1 or s2")->required();
  server_cmd->add_option("--listen", sv.listen, "host:port (default 127.0.0.1:7101 / 7102)");
  server_cmd->add_option("--peer", sv.peer, "S1 address, for s2 (default 127.0.0.1:7101)");
  server_cmd->add_option("--pk", sv.pk, "Public key file")->required();
  server_cmd->add_option("--share", sv.share, "Key share file")->required();
  server_cmd->add_option("--shard", sv.shard, "Encrypted shard file")->required();
  server_cmd->add_option("--epsilon-ct", sv.epsilon_ct, "Encrypted threshold file (s1)");
  server_cmd->add_option("--lanes", sv.lanes, "Concurrent BatchSquare sessions per request");
  server_cmd->add_option("--pool-recognitions", sv.pool_recognitions,
                         "Offline randomness target, in recognitions");
  server_cmd->add_flag("--no-pool", sv.no_pool, "Generate all blinding material online");
  server_cmd->add_option("--transcript", sv.transcript, "Append every frame body to this file")
      ->group("");

  auto* client = app.add_subcommand("client", "User client");
  client->require_subcommand(1);
  ClientArgs cl;
  auto* recognize_cmd = client->add_subcommand("recognize", "Match one probe");
  recognize_cmd->add_option("--probe", cl.probe, "Probe CSV (id,v1,...,vn)")->required();
  recognize_cmd->add_option("--row", cl.row, "Row index in the probe CSV");
  recognize_cmd->add_option("--id", cl.id, "Row id in the probe CSV");
  recognize_cmd->add_option("--s1", cl.s1, "S1 address");
  recognize_cmd->add_option("--s2", cl.s2, "S2 address");
  auto* c_real = recognize_cmd->add_option("--epsilon", cl.epsilon,
                                           "Threshold as a Euclidean distance in feature units");
  auto* c_raw = recognize_cmd->add_option("--epsilon-raw", cl.epsilon_raw,
                                          "Threshold in squared quantized-distance units");
  c_real->excludes(c_raw);
  recognize_cmd->add_option("--pk", cl.pk, "Public key file")->required();
  recognize_cmd->add_option("--scale", cl.scale, "Quantization scale");

  BenchArgs bn;
  auto* bench_cmd = app.add_subcommand("bench", "Measure protocols or the pipeline");
  bench_cmd->add_option("--suite", bn.suite, "protocols or pipeline");
  bench_cmd->add_option("--sizes", bn.sizes, "Input counts (protocols) or rows (pipeline)")
      ->delimiter(',');
  bench_cmd->add_option("--out", bn.out, "CSV output file (default stdout)");
  bench_cmd->add_option("--profile", bn.profile, "standard, toy or toy_wide");
  bench_cmd->add_option("--dimension", bn.dimension, "Feature dimension for the pipeline suite");
  bench_cmd->add_flag("--online", bn.online, "Generate blinding material inside the timed region");
  bench_cmd->add_option("--seed", bn.seed, "Deterministic randomness (benchmarks only)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitError;
  }

  try {
    if (keygen_cmd->parsed()) {
      log::init("org");
      return run_keygen(kg);
    }
    if (enroll_cmd->parsed()) {
      log::init("org");
      return run_enroll(en);
    }
    if (server_cmd->parsed()) {
      log::init(sv.role);
      return run_server(sv);
    }
    if (recognize_cmd->parsed()) {
      log::init("client");
      return run_client(cl);
    }
    if (bench_cmd->parsed()) {
      log::init("bench");
      return run_bench(bn);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
