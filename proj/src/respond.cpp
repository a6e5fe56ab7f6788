#include "twinface/respond.hpp"

#include "twinface/batch.hpp"
#include "twinface/error.hpp"
#include "twinface/smin.hpp"
#include "twinface/wire.hpp"

namespace twinface {

bool is_protocol_request(const std::string& step) {
  return step == "bsq1" || step == "bsm1" || step == "sm1" || step == "nsq1";
}

Envelope respond(const Party& responder, const Envelope& request) {
  Envelope reply{request.session, "", nlohmann::json::object()};
  try {
    if (request.step == "bsq1") {
      reply.step = "bsq2";
      reply.payload["squares"] =
          ct_list_json(square_step2(responder, parse_packed_request(responder, request.payload)));
    } else if (request.step == "bsm1") {
      reply.step = "bsm2";
      reply.payload["products"] =
          ct_list_json(mul_step2(responder, parse_packed_request(responder, request.payload)));
    } else if (request.step == "sm1") {
      reply.step = "sm2";
      reply.payload["d0"] =
          ct_json(smin_step2(responder, parse_smin_request(responder, request.payload)));
    } else if (request.step == "nsq1") {
      reply.step = "nsq2";
      reply.payload["square"] = ct_json(naive_square_step2(responder, request.payload));
    } else {
      throw ProtocolError("unexpected step '" + request.step + "'");
    }
  } catch (const std::exception& e) {
    reply.step = "error";
    reply.payload = nlohmann::json::object();
    reply.payload["message"] = e.what();
  }
  return reply;
}

void serve_protocol(Connection& conn, const Party& responder) {
  while (auto env = conn.recv_inbound()) {
    try {
      conn.send(respond(responder, *env));
    } catch (const TransportError&) {
      return;
    }
  }
}

}  // namespace twinface
