#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace awgent {

enum class ErrorCode {
  invalid_design,
  layout,
  capacity,
  model_validity,
  degeneracy,
  empty_jsa,
  resolution,
  normalization,
  grid_mismatch,
  undefined_visibility,
  ill_conditioned,
  parameter,
  calibration,
  no_data,
  fit,
  insufficient_data,
  coverage,
  config,
  io,
};

std::string_view to_string(ErrorCode code);

// All library failures are reported through this type; `code()` tells callers
// (notably the CLI exit-code mapping) which contract was violated.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace awgent
