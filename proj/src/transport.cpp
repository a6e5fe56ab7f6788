#include "twinface/transport.hpp"

#include <cstdio>

#include "twinface/error.hpp"
#include "twinface/random.hpp"

namespace twinface {

std::string encode_envelope(const Envelope& env) {
  // Field order is fixed; nlohmann::json objects keep payload keys sorted.
  std::string out = "{\"v\":";
  out += std::to_string(kProtocolVersion);
  out += ",\"session\":";
  out += nlohmann::json(env.session).dump();
  out += ",\"step\":";
  out += nlohmann::json(env.step).dump();
  out += ",\"payload\":";
  out += env.payload.dump();
  out += '}';
  return out;
}

Envelope decode_envelope(std::string_view body) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body.begin(), body.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw MalformedFrame(std::string("malformed frame body: ") + e.what(), e.byte);
  }
  if (!j.is_object()) throw MalformedFrame("frame body is not a JSON object", 0);
  auto v = j.find("v");
  if (v == j.end() || !v->is_number_integer() || v->get<int>() != kProtocolVersion) {
    throw MalformedFrame("frame body: missing or unsupported version", 0);
  }
  auto session = j.find("session");
  auto step = j.find("step");
  auto payload = j.find("payload");
  if (session == j.end() || !session->is_string() || step == j.end() || !step->is_string() ||
      payload == j.end() || !payload->is_object()) {
    throw MalformedFrame("frame body: envelope fields missing or mistyped", 0);
  }
  return Envelope{session->get<std::string>(), step->get<std::string>(), std::move(*payload)};
}

std::string encode_frame(const Envelope& env) {
  std::string body = encode_envelope(env);
  if (body.size() > kMaxFrameBody) {
    throw OversizeFrame("frame body of " + std::to_string(body.size()) +
                        " bytes exceeds the 64 MiB limit");
  }
  auto len = static_cast<std::uint32_t>(body.size());
  std::string frame;
  frame.reserve(4 + body.size());
  frame.push_back(static_cast<char>((len >> 24) & 0xFF));
  frame.push_back(static_cast<char>((len >> 16) & 0xFF));
  frame.push_back(static_cast<char>((len >> 8) & 0xFF));
  frame.push_back(static_cast<char>(len & 0xFF));
  frame += body;
  return frame;
}

std::uint32_t read_frame_length(const unsigned char* p) {
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) |
         std::uint32_t{p[3]};
}

Transcript::Transcript(const std::string& path) : file_(path, std::ios::app), to_file_(true) {
  if (!file_) throw Error("cannot open transcript " + path);
}

void Transcript::record(std::string_view direction, std::string_view label, std::string_view body) {
  std::lock_guard lock(mutex_);
  std::string line;
  line.reserve(body.size() + label.size() + 8);
  line.append(direction).append(" ").append(label).append(" ").append(body).append("\n");
  if (to_file_) {
    file_ << line;
    file_.flush();
  } else {
    memory_ += line;
  }
}

std::string Transcript::text() const {
  std::lock_guard lock(mutex_);
  return memory_;
}

void Connection::send(const Envelope& env) {
  std::string frame = encode_frame(env);
  std::lock_guard lock(send_mutex_);
  if (is_closed()) throw ConnectionClosed();
  write_bytes(frame);
  {
    std::lock_guard stats_lock(mutex_);
    stats_.frames_sent += 1;
    stats_.bytes_sent += frame.size();
  }
  if (transcript_) {
    transcript_->record(">", transcript_label_, std::string_view(frame).substr(4));
  }
}

Envelope Connection::recv_for(const std::string& session,
                              std::optional<std::chrono::milliseconds> timeout) {
  std::unique_lock lock(mutex_);
  auto it = sessions_.find(session);
  if (it == sessions_.end()) throw TransportError("recv_for: session '" + session + "' not open");
  auto ready = [&] { return !it->second.empty() || error_ != nullptr; };
  if (timeout) {
    if (!cv_.wait_for(lock, *timeout, ready)) {
      throw TransportError("recv_for: timed out waiting on session '" + session + "'");
    }
  } else {
    cv_.wait(lock, ready);
  }
  if (!it->second.empty()) {
    Envelope env = std::move(it->second.front());
    it->second.pop_front();
    return env;
  }
  std::rethrow_exception(error_);
}

std::optional<Envelope> Connection::recv_inbound() {
  std::unique_lock lock(mutex_);
  cv_.wait(lock, [&] { return !inbound_.empty() || error_ != nullptr; });
  if (inbound_.empty()) return std::nullopt;
  Envelope env = std::move(inbound_.front());
  inbound_.pop_front();
  return env;
}

void Connection::open_session(const std::string& id) {
  std::lock_guard lock(mutex_);
  if (!sessions_.emplace(id, std::deque<Envelope>{}).second) {
    throw TransportError("session id '" + id + "' already open on this connection");
  }
}

void Connection::close_session(const std::string& id) {
  std::lock_guard lock(mutex_);
  sessions_.erase(id);
}

Connection::Connection() {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(system_random().next_u64()));
  tag_ = buf;
}

std::string Connection::new_session_id(std::string_view prefix) {
  return std::string(prefix) + "-" + tag_ + "-" + std::to_string(next_session_.fetch_add(1));
}

bool Connection::is_closed() const {
  std::lock_guard lock(mutex_);
  return error_ != nullptr;
}

TransportStats Connection::stats() const {
  std::lock_guard lock(mutex_);
  return stats_;
}

void Connection::set_transcript(std::shared_ptr<Transcript> t, std::string label) {
  std::lock_guard lock(send_mutex_);
  transcript_ = std::move(t);
  transcript_label_ = std::move(label);
}

void Connection::deliver(Envelope env, std::size_t wire_bytes, std::string_view body) {
  if (transcript_) transcript_->record("<", transcript_label_, body);
  {
    std::lock_guard lock(mutex_);
    stats_.frames_received += 1;
    stats_.bytes_received += wire_bytes;
    auto it = sessions_.find(env.session);
    if (it != sessions_.end()) {
      it->second.push_back(std::move(env));
    } else {
      inbound_.push_back(std::move(env));
    }
  }
  cv_.notify_all();
}

void Connection::fail(std::exception_ptr error) {
  {
    std::lock_guard lock(mutex_);
    if (!error_) error_ = std::move(error);
  }
  cv_.notify_all();
}

namespace {

class LoopbackConnection final : public Connection {
 public:
  void attach(const std::shared_ptr<LoopbackConnection>& peer) { peer_ = peer; }

  void close() override {
    auto peer = peer_.lock();
    fail(std::make_exception_ptr(ConnectionClosed()));
    if (peer) peer->fail(std::make_exception_ptr(ConnectionClosed()));
  }

  void receive_frame(const std::string& frame) {
    std::string_view body = std::string_view(frame).substr(4);
    if (read_frame_length(reinterpret_cast<const unsigned char*>(frame.data())) != body.size()) {
      fail(std::make_exception_ptr(MalformedFrame("frame length prefix mismatch", 0)));
      return;
    }
    try {
      deliver(decode_envelope(body), frame.size(), body);
    } catch (const MalformedFrame&) {
      fail(std::current_exception());
    }
  }

 protected:
  void write_bytes(const std::string& frame) override {
    auto peer = peer_.lock();
    if (!peer || peer->is_closed()) throw ConnectionClosed();
    peer->receive_frame(frame);
  }

 private:
  std::weak_ptr<LoopbackConnection> peer_;
};

}  // namespace

std::pair<std::shared_ptr<Connection>, std::shared_ptr<Connection>> make_loopback_pair() {
  auto a = std::make_shared<LoopbackConnection>();
  auto b = std::make_shared<LoopbackConnection>();
  a->attach(b);
  b->attach(a);
  return {a, b};
}

std::pair<std::string, std::uint16_t> split_host_port(const std::string& address) {
  auto colon = address.rfind(':');
  if (colon == std::string::npos || colon + 1 == address.size()) {
    throw ParameterError("address '" + address + "' is not host:port");
  }
  int port = 0;
  try {
    port = std::stoi(address.substr(colon + 1));
  } catch (const std::exception&) {
    throw ParameterError("address '" + address + "' has a bad port");
  }
  if (port < 0 || port > 65535) throw ParameterError("address '" + address + "' has a bad port");
  std::string host = address.substr(0, colon);
  if (host.empty()) host = "127.0.0.1";
  return {host, static_cast<std::uint16_t>(port)};
}

}  // namespace twinface
