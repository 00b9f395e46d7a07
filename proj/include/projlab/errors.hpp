#pragma once

#include <stdexcept>
#include <string>

namespace projlab {

enum class ErrorCode {
  invalid_argument,
  valence_mismatch,
  degenerate_plane,
  invalid_metric,
  invalid_field,
  solver_error,
  degenerate_tensor,
  non_integrable,
  pole_proximity,
  invalid_curve,
  io_error,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

} // namespace projlab
