#pragma once

#include <stdexcept>
#include <string>

namespace gseo {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition or type invariant was violated by the caller.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Bad command-line usage or a missing input file; maps to exit code 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Any failure talking to a chat, search, or rerank backend.
class ProviderError : public Error {
 public:
  using Error::Error;
};

class TransportError : public ProviderError {
 public:
  using ProviderError::ProviderError;
};

class RateLimitError : public ProviderError {
 public:
  using ProviderError::ProviderError;
};

class QuotaError : public ProviderError {
 public:
  using ProviderError::ProviderError;
};

/// A completion could not be turned into the structure the caller asked for.
class ParseError : public Error {
 public:
  using Error::Error;
};

class CorpusError : public Error {
 public:
  using Error::Error;
};

class EvaluationError : public Error {
 public:
  using Error::Error;
};

class StrategyError : public Error {
 public:
  using Error::Error;
};

}  // namespace gseo
