#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gxs {

enum class ErrorCode {
  MalformedGa,
  NetworkError,
  SchemaError,
  IoError,
  DuplicateId,
  EmptyCorpus,
  EmptyQuery,
  BadParam,
  BadDim,
  AuthError,
  RateLimited,
  DimMismatch,
  EmptyIndex,
  EmptyMatrix,
  TooManyCandidates,
  Unparseable,
  TooFewPoints,
  InsufficientKeywords,
  ClientError,
  UnknownSeed,
  EmptyGold,
  UnknownQuery,
  UnknownMethod,
  NotFound,
};

/// Stable snake_case name used in CLI error lines and HTTP error bodies.
std::string_view error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace gxs
