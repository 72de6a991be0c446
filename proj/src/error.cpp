#include "stairloc/error.hpp"

namespace stairloc {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonPositiveDepth: return "NonPositiveDepth";
    case ErrorCode::OutOfBounds: return "OutOfBounds";
    case ErrorCode::DegenerateSegment: return "DegenerateSegment";
    case ErrorCode::InsufficientConsensus: return "InsufficientConsensus";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::EmptyCrop: return "EmptyCrop";
    case ErrorCode::OutOfImage: return "OutOfImage";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::InvariantError: return "InvariantError";
    case ErrorCode::NoDetection: return "NoDetection";
    case ErrorCode::NoValidDepth: return "NoValidDepth";
    case ErrorCode::EmptyCloud: return "EmptyCloud";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::DegenerateCluster: return "DegenerateCluster";
    case ErrorCode::AllRejected: return "AllRejected";
    case ErrorCode::NotVisible: return "NotVisible";
    case ErrorCode::JoinError: return "JoinError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::SpecError: return "SpecError";
  }
  return "Unknown";
}

}  // namespace stairloc
