#include "svgpmap/errors.hpp"

namespace svgpmap {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidCovariance: return "E_INVALID_COVARIANCE";
    case ErrorCode::JitterExhausted: return "E_JITTER_EXHAUSTED";
    case ErrorCode::EmptyDataset: return "E_EMPTY_DATASET";
    case ErrorCode::DivergedTraining: return "E_DIVERGED_TRAINING";
    case ErrorCode::DegenerateWeights: return "E_DEGENERATE_WEIGHTS";
    case ErrorCode::EmptyRegion: return "E_EMPTY_REGION";
    case ErrorCode::InvalidArgument: return "E_INVALID_ARGUMENT";
    case ErrorCode::Io: return "E_IO";
    case ErrorCode::Config: return "E_CONFIG";
  }
  return "E_UNKNOWN";
}

}  // namespace svgpmap
