#pragma once

#include <chrono>
#include <span>
#include <string>

#include "twinface/recognition.hpp"

namespace twinface {

struct ClientOptions {
  std::string s1 = "127.0.0.1:7101";
  std::string s2 = "127.0.0.1:7102";
  std::chrono::milliseconds connect_wait{5000};
  std::chrono::milliseconds timeout{600000};
};

// One recognition against running daemons: encrypts the probe and R, sends
// "probe" to both servers and recovers gamma from S2's "result". Transport
// failures and server-reported errors throw.
RecognitionOutcome recognize_remote(const ClientOptions& options, const ParamSet& params,
                                    const PublicKey& pk, std::span<const std::int64_t> probe,
                                    const BigInt& epsilon, RandomSource& rng = system_random());

// Fresh request id: "req-" followed by 16 hex digits.
std::string new_request_id(RandomSource& rng);

}  // namespace twinface
