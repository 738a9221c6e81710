#pragma once

#include <stdexcept>
#include <string>

namespace softsc {

// Error taxonomy mirrors the CLI exit codes:
//   ConfigError  -> 1 (bad configuration, caught before any work starts)
//   DomainError  -> 2 (invariant violation in domain data)
//   DataError    -> 2 (malformed external input: files, wire payloads)
//   BackendError -> 3 (generation backend failures)
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class BackendError : public Error {
 public:
  using Error::Error;
};

// HTTP backend failures, each a distinct class so callers can react
// differently (auth problems should not be retried, timeouts already were).
class AuthError : public BackendError {
 public:
  using BackendError::BackendError;
};

class TimeoutError : public BackendError {
 public:
  using BackendError::BackendError;
};

// The endpoint answered but lacks a demanded capability (e.g. the caller
// requires token logprobs and the response carries none).
class CapabilityError : public BackendError {
 public:
  using BackendError::BackendError;
};

}  // namespace softsc
