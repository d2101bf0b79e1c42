#pragma once

#include "fracture/kernels.hpp"
#include "fracture/mesh.hpp"
#include "fracture/operators.hpp"

#include <Eigen/Core>

#include <memory>
#include <vector>

namespace fracture {

struct ConicOptions {
  double tolerance = 1e-9;  // relative primal and dual residual
  int max_iterations = 50000;
  double relaxation = 1.6;
  double proximal_weight = 1e-6;  // relative to the jump/mass trace ratio
  int adapt_interval = 25;
  int adapt_limit = 1000;  // rho is frozen afterwards
  bool polish = true;
  int polish_interval = 50;
  double polish_threshold = 1e-4;  // residual level at which early polishing starts
  double polish_gap = 1e-6;        // relative dual gap accepted for an early polish
};

/// ADMM iterate carried between fixed-point iterations of one mode.
struct ConicState {
  Eigen::VectorXd v;
  Eigen::VectorXd y;
  Eigen::VectorXd u;
  double rho = 0.0;
};

struct ConicResult {
  Field field;               // m x d
  double objective = 0.0;    // sum_e sqrt(d) sqrt(a_e) |eta_e (.) (u_f - u_g)|
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double duality_gap = 0.0;  // objective minus the dual bound b^T nu
  double constraint_residual = 0.0;
  int iterations = 0;
  bool polished = false;
  bool converged = false;
};

/// Per-element reduced conic program
///
///   min_u  sum_e z_e,  z_e >= sqrt(d) |(D_elem u)_e|
///   s.t.   c^T M u = 1,  U_j^T M u = 0 for every prior U_j,
///
/// solved as a sum-of-norms problem with affine equalities. The jump
/// Laplacian is factored once at construction; priors are fixed per mode and
/// the normalization field c changes across fixed-point iterations.
class ConicSubproblem {
 public:
  ConicSubproblem(const ExplodedMesh& em, const MassMatrix& mass, const FacetWeights& eta,
                  ConicOptions options = {});
  ~ConicSubproblem();
  ConicSubproblem(ConicSubproblem&&) noexcept;

  /// Fixes the orthogonality constraints. Priors must be M-orthonormal.
  void set_priors(const std::vector<Field>& priors);

  ConicResult solve(const Field& normalization, ConicState* state = nullptr) const;

  double objective(const Field& field) const;
  const kernels::JumpOperator& jump() const { return jump_; }
  const ConicOptions& options() const { return options_; }

 private:
  struct Factorization;

  Eigen::VectorXd solve_jump_system(const Eigen::VectorXd& rhs) const;
  bool polish(const Eigen::VectorXd& y, const Eigen::MatrixXd& constraints, const Eigen::VectorXd& rhs,
              Eigen::VectorXd& v, double& objective, std::vector<int>* labels = nullptr) const;

  int dimension_ = 0;
  int unknowns_ = 0;
  kernels::JumpOperator jump_;
  Eigen::VectorXd dof_mass_;
  double proximal_ = 0.0;
  ConicOptions options_;
  std::vector<std::shared_ptr<Factorization>> factors_;  // per coordinate; shared when equal
  Eigen::MatrixXd prior_rows_;    // np x md, rows U_j^T M
  Eigen::MatrixXd prior_solves_;  // md x np, K^{-1} (U_j^T M)^T
};

ConicResult solve_conic_subproblem(const ExplodedMesh& em, const MassMatrix& mass, const FacetWeights& eta,
                                   const Field& normalization, const std::vector<Field>& priors,
                                   const ConicOptions& options = {});

}  // namespace fracture
