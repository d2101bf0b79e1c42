#pragma once

#include "fracture/mesh.hpp"

#include <Eigen/Core>

#include <vector>

// Dense, formula-level reimplementations used as test oracles. Nothing here
// shares code with the library's sparse assembly.
namespace oracle {

/// Scalar P1 stiffness on the unexploded mesh: cotangent weights in 2D,
/// barycentric-gradient integrals in 3D. PSD sign convention.
Eigen::MatrixXd dense_laplacian(const fracture::Mesh& mesh);

/// Lumped vertex masses |f| / (d + 1) summed over incident elements.
Eigen::VectorXd dense_vertex_mass(const fracture::Mesh& mesh, double density = 1.0);

/// Element measures.
Eigen::VectorXd dense_element_mass(const fracture::Mesh& mesh, double density = 1.0);

/// Generalized eigenpairs of (L, diag(mass)) ascending, via Eigen's
/// GeneralizedSelfAdjointEigenSolver.
void dense_generalized_eigen(const Eigen::MatrixXd& stiffness, const Eigen::VectorXd& mass,
                             Eigen::VectorXd& values, Eigen::MatrixXd& vectors);

/// Per-piece projected impact w* by the textbook chain: dense solve of
/// (M + tau L) g = M delta_v, w = g n on corners, alpha_i = U_i^T M~ w,
/// w* = sum alpha_i U_i, mass-weighted piece means. `fields` are m x d.
Eigen::MatrixXd dense_projected_impact(const fracture::Mesh& mesh, const std::vector<Eigen::MatrixXd>& fields,
                                       const std::vector<int>& piece_labels, int pieces, int vertex,
                                       const Eigen::VectorXd& normal, double tau, double magnitude = 1.0);

/// Energy sum_e sqrt(a_e) |eta (.) (u_f - u_g)| over interior facets found by
/// face matching, per facet vertex key.
double dense_jump_energy(const fracture::Mesh& mesh, const Eigen::MatrixXd& field, const Eigen::VectorXd& eta_axis);

}  // namespace oracle
