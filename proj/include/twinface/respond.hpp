#pragma once

#include <optional>

#include "twinface/party.hpp"
#include "twinface/transport.hpp"

namespace twinface {

// True for the steps a responder answers: bsq1, bsm1, sm1, nsq1.
bool is_protocol_request(const std::string& step);

// Reply to one protocol request. Failures become an "error" envelope on the
// same session so the initiator does not block.
Envelope respond(const Party& responder, const Envelope& request);

// Answers every inbound protocol request until the connection closes. Other
// steps are answered with "error".
void serve_protocol(Connection& conn, const Party& responder);

}  // namespace twinface
