#include "twinface/client.hpp"

#include <cstdio>

#include "twinface/error.hpp"
#include "twinface/wire.hpp"

namespace twinface {

std::string new_request_id(RandomSource& rng) {
  char buf[21];
  std::snprintf(buf, sizeof(buf), "req-%016llx", static_cast<unsigned long long>(rng.next_u64()));
  return buf;
}

namespace {

std::shared_ptr<Connection> dial(const std::string& address, std::chrono::milliseconds wait) {
  auto [host, port] = split_host_port(address);
  auto conn = tcp_connect_retry(host, port, wait);
  nlohmann::json p;
  p["role"] = "client";
  conn->send(Envelope{"hello", "hello", p});
  return conn;
}

}  // namespace

RecognitionOutcome recognize_remote(const ClientOptions& options, const ParamSet& params,
                                    const PublicKey& pk, std::span<const std::int64_t> probe,
                                    const BigInt& epsilon, RandomSource& rng) {
  ClientProbe cp = make_probe(pk, params, probe, rng, new_request_id(rng));
  const std::string& id = cp.request.request_id;

  auto s1 = dial(options.s1, options.connect_wait);
  auto s2 = dial(options.s2, options.connect_wait);
  s1->open_session(id);
  s2->open_session(id);

  nlohmann::json to_s2;
  to_s2["request_id"] = id;
  to_s2["p_ct"] = ct_list_json(cp.request.probe);
  nlohmann::json to_s1 = to_s2;
  to_s1["r_ct"] = ct_json(cp.request.mask);
  s1->send(Envelope{id, "probe", std::move(to_s1)});
  s2->send(Envelope{id, "probe", std::move(to_s2)});

  Envelope reply = s2->recv_for(id, options.timeout);
  s1->close();
  s2->close();
  if (reply.step == "error") {
    throw ProtocolError("server reported: " + reply.payload.value("message", std::string("error")));
  }
  if (reply.step != "result" || reply.payload.value("request_id", std::string()) != id) {
    throw ProtocolError("unexpected reply step '" + reply.step + "'");
  }
  auto masked = reply.payload.find("masked");
  if (masked == reply.payload.end() || !masked->is_string()) {
    throw ProtocolError("result lacks 'masked'");
  }
  BigInt value = from_hex(masked->get<std::string>());
  if (value >= pk.n()) throw ProtocolError("masked result outside Z_N");
  return recover(params, pk, value, cp.r, epsilon, id);
}

}  // namespace twinface
