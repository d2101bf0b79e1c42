#pragma once

#include "fracture/error.hpp"
#include "fracture/mesh.hpp"
#include "fracture/operators.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace fracture {

/// Process exit statuses shared by every subcommand.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 2,
  kExitData = 3,
  kExitSolver = 4,
};

int exit_code_for(ErrorCode code);

/// Anisotropy weights from a CLI argument: "a,b[,c]" for uniform per-axis
/// weights, or a path to a weight file whose first token is `facet` (one row
/// per interior facet) or `element` (one row per element; a facet takes the
/// mean of its two elements).
FacetWeights parse_eta(const std::string& text, const ExplodedMesh& em);

/// Comma-separated vector of exactly `dimension` numbers.
Eigen::VectorXd parse_vector(const std::string& text, int dimension, const char* what);

/// `fracture <subcommand> ...` with args excluding the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fracture
