#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace stairloc {

enum class ErrorCode {
  NonPositiveDepth,
  OutOfBounds,
  DegenerateSegment,
  InsufficientConsensus,
  EmptyInput,
  EmptyCrop,
  OutOfImage,
  SchemaError,
  InvariantError,
  NoDetection,
  NoValidDepth,
  EmptyCloud,
  TooFewPoints,
  DegenerateCluster,
  AllRejected,
  NotVisible,
  JoinError,
  IoError,
  SpecError,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries a machine-readable code so
// per-frame rejections can be reported by name.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace stairloc
