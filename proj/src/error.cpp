#include "gxs/error.hpp"

namespace gxs {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MalformedGa: return "malformed_ga";
    case ErrorCode::NetworkError: return "network_error";
    case ErrorCode::SchemaError: return "schema_error";
    case ErrorCode::IoError: return "io_error";
    case ErrorCode::DuplicateId: return "duplicate_id";
    case ErrorCode::EmptyCorpus: return "empty_corpus";
    case ErrorCode::EmptyQuery: return "empty_query";
    case ErrorCode::BadParam: return "bad_param";
    case ErrorCode::BadDim: return "bad_dim";
    case ErrorCode::AuthError: return "auth_error";
    case ErrorCode::RateLimited: return "rate_limited";
    case ErrorCode::DimMismatch: return "dim_mismatch";
    case ErrorCode::EmptyIndex: return "empty_index";
    case ErrorCode::EmptyMatrix: return "empty_matrix";
    case ErrorCode::TooManyCandidates: return "too_many_candidates";
    case ErrorCode::Unparseable: return "unparseable";
    case ErrorCode::TooFewPoints: return "too_few_points";
    case ErrorCode::InsufficientKeywords: return "insufficient_keywords";
    case ErrorCode::ClientError: return "client_error";
    case ErrorCode::UnknownSeed: return "unknown_seed";
    case ErrorCode::EmptyGold: return "empty_gold";
    case ErrorCode::UnknownQuery: return "unknown_query";
    case ErrorCode::UnknownMethod: return "unknown_method";
    case ErrorCode::NotFound: return "not_found";
  }
  return "unknown";
}

}  // namespace gxs
