#include "fracture/error.hpp"

namespace fracture {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::io: return "io";
    case ErrorCode::parse: return "parse";
    case ErrorCode::non_simplicial: return "non-simplicial";
    case ErrorCode::degenerate_element: return "degenerate-element";
    case ErrorCode::non_manifold: return "non-manifold";
    case ErrorCode::invalid_mesh: return "invalid-mesh";
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::out_of_range: return "out-of-range";
    case ErrorCode::mesh_mismatch: return "mesh-mismatch";
    case ErrorCode::off_body: return "off-body";
    case ErrorCode::infeasible: return "infeasible";
    case ErrorCode::not_converged: return "not-converged";
  }
  return "unknown";
}

}  // namespace fracture
