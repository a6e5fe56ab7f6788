#pragma once

// Shared key material for the test binaries. Keys are generated once per
// process from a fixed seed so failures reproduce.

#include <memory>
#include <thread>

#include "twinface/paillier.hpp"
#include "twinface/party.hpp"
#include "twinface/respond.hpp"
#include "twinface/transport.hpp"

namespace fixtures {

inline twinface::RandomSource& rng() {
  static twinface::SeededRandom r(20261015);
  return r;
}

inline const twinface::KeyMaterial& toy_keys() {
  static twinface::KeyMaterial k = twinface::keygen(twinface::ParamSet::toy(), rng());
  return k;
}

inline const twinface::KeyMaterial& wide_keys() {
  static twinface::KeyMaterial k = twinface::keygen(twinface::ParamSet::toy_wide(), rng());
  return k;
}

inline const twinface::KeyMaterial& standard_keys() {
  static twinface::KeyMaterial k = twinface::keygen(twinface::ParamSet::standard(), rng());
  return k;
}

inline twinface::Party party(const twinface::KeyMaterial& k, int index) {
  return twinface::Party(k.params, k.pk, k.share(index), rng());
}

// Signed value in [-(bound-1), bound-1].
inline twinface::BigInt random_signed(const twinface::BigInt& bound) {
  return twinface::random_below(rng(), 2 * bound - 1) - (bound - 1);
}

// Loopback pair whose far end answers protocol requests as `responder`.
struct RemoteResponder {
  twinface::Party responder;
  std::shared_ptr<twinface::Connection> near;
  std::shared_ptr<twinface::Connection> far;
  std::thread worker;

  explicit RemoteResponder(twinface::Party p) : responder(std::move(p)) {
    std::tie(near, far) = twinface::make_loopback_pair();
    worker = std::thread([this] { twinface::serve_protocol(*far, responder); });
  }
  ~RemoteResponder() {
    near->close();
    worker.join();
  }
};

}  // namespace fixtures
