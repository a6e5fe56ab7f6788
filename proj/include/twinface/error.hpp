#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace twinface {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An argument lies outside the domain an operation accepts (plaintext >= N, |x| > 2^ell, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// A decryption or combination step produced an inexact division: corrupt
// ciphertext, wrong key, or mismatched partial decryptions.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

class CapacityError : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class ResourceExhausted : public Error {
 public:
  using Error::Error;
};

// Malformed file contents (keys, shards, CSV).
class FormatError : public Error {
 public:
  using Error::Error;
};

// Peer behaved outside the protocol (unexpected step, wrong reply count).
class ProtocolError : public Error {
 public:
  using Error::Error;
};

class TransportError : public Error {
 public:
  using Error::Error;
};

class ConnectionClosed : public TransportError {
 public:
  ConnectionClosed() : TransportError("connection closed") {}
  using TransportError::TransportError;
};

class OversizeFrame : public TransportError {
 public:
  using TransportError::TransportError;
};

class MalformedFrame : public TransportError {
 public:
  MalformedFrame(const std::string& what, std::size_t byte_offset)
      : TransportError(what + " (at byte " + std::to_string(byte_offset) + ")"),
        offset_(byte_offset) {}

  std::size_t byte_offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace twinface
