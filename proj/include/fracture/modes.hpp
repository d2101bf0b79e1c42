#pragma once

#include "fracture/conic.hpp"
#include "fracture/eigensolver.hpp"
#include "fracture/mesh.hpp"
#include "fracture/operators.hpp"

#include <optional>
#include <vector>

namespace fracture {

struct SolverConfig {
  int k = 10;
  double epsilon = 1e-10;
  // Weight of the discontinuity term against the strain term. The reduced
  // per-element program has no strain term, so it does not enter.
  double omega = 1.0;
  int max_inner_iters = 100;
  double conic_tolerance = 1e-9;
  double density = 1.0;
  bool deterministic = true;
};

struct ModeStats {
  int inner_iterations = 0;
  int conic_iterations = 0;
  double seconds = 0.0;
  double duality_gap = 0.0;
  bool polished = false;
};

/// k mass-orthonormal per-element displacement fields, ascending energy.
struct FractureModes {
  int dimension = 0;
  int elements = 0;
  int facets = 0;
  std::vector<Field> fields;                // each m x d
  std::vector<double> energies;             // sum_e sqrt(a_e) |eta_e (.) jump_e|
  std::vector<double> objectives;           // conic objective, sqrt(d) * energy
  std::vector<Eigen::VectorXd> facet_jumps; // |(D_elem U_i)_e| per facet
  std::vector<double> element_masses;
  FacetWeights eta;
  std::vector<ModeStats> stats;

  int k() const { return static_cast<int>(fields.size()); }
};

/// Initialization pool: generalized eigenvectors of the unexploded (L, M)
/// tensored with the coordinate axes (axis index fastest), averaged onto
/// elements. The pool holds at least k candidates.
struct ModeInitialization {
  EigenPairs eigen;
  std::vector<Field> fields;
  std::vector<std::pair<int, int>> origin;  // (eigenvector, axis)
};

ModeInitialization eigen_init(const ExplodedMesh& em, const SparseMatrix& laplacian,
                              const std::vector<double>& vertex_mass, int k, int extra_vectors = -1);

FractureModes compute_modes(const Mesh& mesh, const SolverConfig& config,
                            const std::optional<FacetWeights>& eta = std::nullopt);
FractureModes compute_modes(const ExplodedMesh& em, const SolverConfig& config,
                            const std::optional<FacetWeights>& eta = std::nullopt);

/// Stored energy of mode i (1-based).
double mode_energy(const FractureModes& modes, int i);
/// Energy of mode i (1-based) re-evaluated through D_elem.
double recompute_mode_energy(const ExplodedMesh& em, const FractureModes& modes, int i);

/// max |U^T M U - I| over the element mass inner product.
double orthonormality_error(const FractureModes& modes);

/// <a, b>_M for per-element fields.
double mass_inner(const Field& a, const Field& b, const std::vector<double>& element_mass);

}  // namespace fracture
