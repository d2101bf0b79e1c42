#pragma once

#include <stdexcept>
#include <string>

namespace fracture {

enum class ErrorCode {
  io,
  parse,
  non_simplicial,
  degenerate_element,
  non_manifold,
  invalid_mesh,
  invalid_argument,
  out_of_range,
  mesh_mismatch,
  off_body,
  infeasible,
  not_converged,
};

const char* to_string(ErrorCode code);

/// Library-wide exception. The code lets drivers map failures onto exit
/// statuses and HTTP responses without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace fracture
