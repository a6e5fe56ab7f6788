#include "twinface/recognition.hpp"

#include <algorithm>
#include <exception>
#include <future>
#include <limits>

#include "twinface/batch.hpp"
#include "twinface/error.hpp"
#include "twinface/kernels.hpp"
#include "twinface/respond.hpp"
#include "twinface/smin.hpp"

namespace twinface {

std::vector<std::int64_t> quantize_vector(std::span<const double> v, const QuantizationSpec& spec) {
  std::vector<std::int64_t> out;
  out.reserve(v.size());
  for (double f : v) out.push_back(quantize(f, spec));
  return out;
}

PlainDatabase quantize_table(const FeatureTable& table, const QuantizationSpec& spec) {
  PlainDatabase db;
  db.ids = table.ids;
  for (const auto& row : table.values) db.rows.push_back(quantize_vector(row, spec));
  return db;
}

std::string to_string(ServerRole role) { return role == ServerRole::s1 ? "s1" : "s2"; }

ServerRole parse_role(const std::string& text) {
  if (text == "s1") return ServerRole::s1;
  if (text == "s2") return ServerRole::s2;
  throw ParameterError("role must be s1 or s2, got '" + text + "'");
}

std::vector<Ciphertext> EncryptedShard::cells() const {
  std::vector<Ciphertext> out;
  out.reserve(rows.size() * dimension);
  for (const auto& row : rows) out.insert(out.end(), row.values.begin(), row.values.end());
  return out;
}

void check_distance_bound(const ParamSet& params, std::size_t dimension,
                          std::int64_t coordinate_bound) {
  if (coordinate_bound <= 0) throw ParameterError("coordinate bound must be positive");
  BigInt bound = coordinate_bound;
  if (BigInt(static_cast<unsigned long>(dimension)) * bound * bound >= pow2(params.ell)) {
    throw ParameterError("squared distances of " + std::to_string(dimension) +
                         " coordinates bounded by " + std::to_string(coordinate_bound) +
                         " do not fit below 2^" + std::to_string(params.ell));
  }
}

ShardPair encrypt_database(const PublicKey& pk, const ParamSet& params, const PlainDatabase& db,
                           RandomSource& rng, std::optional<std::size_t> split,
                           std::int64_t coordinate_bound) {
  if (db.rows.size() != db.ids.size()) throw DimensionError("database ids and rows differ in count");
  std::size_t dim = db.dimension();
  if (!db.rows.empty() && dim == 0) throw DimensionError("database rows are empty");
  check_distance_bound(params, dim, coordinate_bound);
  std::size_t s2_rows = split.value_or(db.rows.size() / 2);
  if (s2_rows > db.rows.size()) throw DimensionError("split point beyond the last row");

  std::vector<BigInt> plain;
  plain.reserve(db.rows.size() * (dim + 1));
  for (std::size_t i = 0; i < db.rows.size(); ++i) {
    if (db.rows[i].size() != dim) {
      throw DimensionError("row " + std::to_string(i) + " has " +
                           std::to_string(db.rows[i].size()) + " values, expected " +
                           std::to_string(dim));
    }
    plain.emplace_back(static_cast<unsigned long>(i));
    for (std::int64_t v : db.rows[i]) {
      if (v < 0 || v > coordinate_bound) {
        throw DomainError("row " + std::to_string(i) + " holds a value outside [0, " +
                          std::to_string(coordinate_bound) + "]");
      }
      plain.emplace_back(static_cast<long>(v));
    }
  }
  auto cts = kernels::parallel::encrypt_values(pk, plain, rng);

  ShardPair out;
  out.s2 = EncryptedShard{ServerRole::s2, 0, dim, {}};
  out.s1 = EncryptedShard{ServerRole::s1, s2_rows, dim, {}};
  for (std::size_t i = 0; i < db.rows.size(); ++i) {
    auto first = cts.begin() + static_cast<std::ptrdiff_t>(i * (dim + 1));
    EncryptedRow row{*first, std::vector<Ciphertext>(first + 1, first + 1 + static_cast<std::ptrdiff_t>(dim))};
    (i < s2_rows ? out.s2 : out.s1).rows.push_back(std::move(row));
  }
  return out;
}

ClientProbe make_probe(const PublicKey& pk, const ParamSet& params,
                       std::span<const std::int64_t> probe, RandomSource& rng,
                       std::string request_id) {
  std::vector<BigInt> plain;
  plain.reserve(probe.size());
  for (std::int64_t v : probe) {
    if (v < 0) throw DomainError("probe values must be non-negative");
    plain.emplace_back(static_cast<long>(v));
  }
  ClientProbe out;
  out.request.request_id = std::move(request_id);
  out.request.probe = kernels::parallel::encrypt_values(pk, plain, rng);
  out.r = random_bits(rng, params.sigma);
  out.request.mask = encrypt(pk, out.r, rng);
  return out;
}

std::vector<Ciphertext> squared_distances(Connection& conn, const Party& party,
                                          const EncryptedShard& shard,
                                          std::span<const Ciphertext> probe, std::size_t lanes,
                                          SessionCounters* counters) {
  if (shard.rows.empty()) return {};
  if (probe.size() != shard.dimension) {
    throw DimensionError("probe has " + std::to_string(probe.size()) + " values, shard rows have " +
                         std::to_string(shard.dimension));
  }
  std::vector<Ciphertext> cells = shard.cells();
  std::vector<Ciphertext> diffs = kernels::parallel::diff_matrix(party.pk(), probe, cells);

  // Lane boundaries fall on whole sub-batches so each lane's chunking matches
  // a single-session run.
  std::size_t limit = max_slots(party.params(), BatchKind::square);
  std::size_t batches = (diffs.size() + limit - 1) / limit;
  lanes = std::clamp<std::size_t>(lanes, 1, batches);
  std::vector<Ciphertext> squares(diffs.size());
  std::vector<SessionCounters> lane_counters(lanes);
  auto run_lane = [&](std::size_t lane) {
    std::size_t begin = batches * lane / lanes * limit;
    std::size_t end = std::min(diffs.size(), batches * (lane + 1) / lanes * limit);
    if (begin >= end) return;
    Session session(conn, "bsq");
    auto out = batch_square(session, party,
                            std::span<const Ciphertext>(diffs).subspan(begin, end - begin));
    std::move(out.begin(), out.end(), squares.begin() + static_cast<std::ptrdiff_t>(begin));
    lane_counters[lane] = session.counters();
  };
  if (lanes == 1) {
    run_lane(0);
  } else {
    std::vector<std::future<void>> futures;
    for (std::size_t lane = 0; lane < lanes; ++lane) {
      futures.push_back(std::async(std::launch::async, run_lane, lane));
    }
    std::exception_ptr error;
    for (auto& f : futures) {
      try {
        f.get();
      } catch (...) {
        if (!error) error = std::current_exception();
      }
    }
    if (error) std::rethrow_exception(error);
  }
  if (counters) {
    for (const auto& c : lane_counters) *counters += c;
  }
  return kernels::parallel::row_sums(party.pk(), squares, shard.dimension);
}

std::optional<Ciphertext> local_min(Connection& conn, const Party& party,
                                    std::span<const Ciphertext> distances,
                                    SessionCounters* counters) {
  if (distances.empty()) return std::nullopt;
  Session session(conn, "smin");
  Ciphertext out = smin_n(session, party, distances);
  if (counters) *counters += session.counters();
  return out;
}

Ciphertext final_min(Connection& conn, const Party& party, const std::optional<Ciphertext>& d_s1,
                     const std::optional<Ciphertext>& d_s2, const Ciphertext& epsilon,
                     SessionCounters* counters) {
  std::vector<Ciphertext> values;
  if (d_s1) values.push_back(*d_s1);
  if (d_s2) values.push_back(*d_s2);
  values.push_back(epsilon);
  Session session(conn, "fmin");
  Ciphertext out = smin_n(session, party, values);
  if (counters) *counters += session.counters();
  return out;
}

MaskedResult mask_result(const Party& s1, const Ciphertext& gamma, const Ciphertext& mask) {
  Ciphertext masked = hom_add(s1.pk(), gamma, mask);
  return MaskedResult{masked, s1.partial(masked)};
}

BigInt release_masked(const Party& s2, const MaskedResult& m) {
  return threshold_decrypt(s2.pk(), m.partial, s2.partial(m.masked));
}

RecognitionOutcome recover(const ParamSet& params, const PublicKey& pk, const BigInt& masked,
                           const BigInt& r, const BigInt& epsilon, std::string request_id) {
  RecognitionOutcome out;
  out.request_id = std::move(request_id);
  out.masked = masked;
  out.gamma = mod(masked - r, pk.n());
  if (out.gamma >= pow2(params.ell)) {
    throw RangeError("recovered value lies outside [0, 2^" + std::to_string(params.ell) + ")");
  }
  out.epsilon = epsilon;
  out.accepted = out.gamma < epsilon;
  return out;
}

std::int64_t squared_distance(std::span<const std::int64_t> a, std::span<const std::int64_t> b) {
  if (a.size() != b.size()) throw DimensionError("squared_distance: dimensions differ");
  std::int64_t sum = 0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    std::int64_t d = a[j] - b[j];
    sum += d * d;
  }
  return sum;
}

std::int64_t plaintext_gamma(const PlainDatabase& db, std::span<const std::int64_t> probe,
                             std::int64_t epsilon) {
  std::int64_t best = epsilon;
  for (const auto& row : db.rows) best = std::min(best, squared_distance(probe, row));
  return best;
}

LocalTwin::LocalTwin(Party s1, Party s2, ShardPair shards, Ciphertext epsilon_ct,
                     std::size_t lanes)
    : s1_(std::move(s1)),
      s2_(std::move(s2)),
      shards_(std::move(shards)),
      epsilon_ct_(std::move(epsilon_ct)),
      lanes_(lanes) {
  std::tie(s1_end_, s2_end_) = make_loopback_pair();
  s1_responder_ = std::thread([this] { serve_protocol(*s1_end_, s1_); });
  s2_responder_ = std::thread([this] { serve_protocol(*s2_end_, s2_); });
}

LocalTwin::~LocalTwin() {
  s1_end_->close();
  s1_responder_.join();
  s2_responder_.join();
}

BigInt LocalTwin::run(const ProbeRequest& req) {
  SessionCounters c1, c2;
  auto s2_side = std::async(std::launch::async, [&] {
    auto d = squared_distances(*s2_end_, s2_, shards_.s2, req.probe, lanes_, &c2);
    return local_min(*s2_end_, s2_, d, &c2);
  });
  std::optional<Ciphertext> m1;
  try {
    auto d = squared_distances(*s1_end_, s1_, shards_.s1, req.probe, lanes_, &c1);
    m1 = local_min(*s1_end_, s1_, d, &c1);
  } catch (...) {
    s2_side.wait();
    throw;
  }
  std::optional<Ciphertext> m2 = s2_side.get();
  Ciphertext gamma = final_min(*s1_end_, s1_, m1, m2, epsilon_ct_, &c1);
  c1 += c2;
  last_counters_ = c1;
  return release_masked(s2_, mask_result(s1_, gamma, req.mask));
}

RecognitionOutcome LocalTwin::recognize(std::span<const std::int64_t> probe,
                                        const BigInt& epsilon, RandomSource& client_rng) {
  std::string id = "local-" + std::to_string(next_request_++);
  ClientProbe cp = make_probe(s1_.pk(), s1_.params(), probe, client_rng, id);
  BigInt masked = run(cp.request);
  return recover(s1_.params(), s1_.pk(), masked, cp.r, epsilon, id);
}

}  // namespace twinface
