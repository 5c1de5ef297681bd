#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace svgpmap {

enum class ErrorCode {
  InvalidCovariance,
  JitterExhausted,
  EmptyDataset,
  DivergedTraining,
  DegenerateWeights,
  EmptyRegion,
  InvalidArgument,
  Io,
  Config,
};

std::string_view to_string(ErrorCode code);

/// Library-wide exception. `code()` is what the CLI maps to its exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace svgpmap
