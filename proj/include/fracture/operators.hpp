#pragma once

#include "fracture/mesh.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <span>
#include <vector>

namespace fracture {

using SparseMatrix = Eigen::SparseMatrix<double>;
/// Row-major field with one d-vector per row (element, corner or facet).
using Field = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
/// p x d anisotropy weights, one row per interior facet.
using FacetWeights = Field;

/// Lumped mass on the exploded mesh plus the derived per-element and
/// per-vertex masses.
struct MassMatrix {
  double density = 1.0;
  std::vector<double> corner;   // rho * |f| / (d + 1)
  std::vector<double> element;  // rho * |f|; equals the diagonal of C^T M C
  std::vector<double> vertex;   // lumped on the original (unexploded) vertices
  double total = 0.0;
};

MassMatrix assemble_mass(const ExplodedMesh& em, double density);

/// Scalar P1 Laplacian, stored PSD. Applied per coordinate it is the strain
/// Hessian Q = I_d (x) L~.
struct StiffnessMatrix {
  SparseMatrix exploded;  // (d+1)m x (d+1)m, block diagonal
  SparseMatrix vertex;    // n x n, assembled on the original mesh
  int minimum_quality_element = -1;
  double minimum_quality = 0.0;

  /// u^T Q u for a corner field (corners x d); equals
  /// sum_f \int_f |grad u|^2 for the piecewise-linear interpolant.
  double quadratic_form(const Field& corner_field) const;
};

StiffnessMatrix assemble_stiffness(const ExplodedMesh& em);

/// Replication of per-element values onto corners (matrix C) and its
/// mass-weighted left inverse.
struct ElementTransfer {
  SparseMatrix replicate;  // corners x elements, one 1 per row
  int corners_per_element = 0;

  Field to_corners(const Field& element_field) const;
  Field to_elements(const Field& corner_field) const;
};

ElementTransfer assemble_transfer(const ExplodedMesh& em);

/// Discontinuity evaluation across interior facets, in quadrature form on
/// corner fields and in the per-element form used by the reduced program.
struct DiscontinuityOperator {
  int dimension = 0;
  int quadrature_points = 0;
  int facets = 0;
  FacetWeights eta;

  // Rows (s * p + e) * d + c: weighted jump at quadrature point s of facet e.
  SparseMatrix quadrature;
  // Rows e * d + c: sqrt(a_e) * eta_e (.) (u_f - u_g).
  SparseMatrix element;

  /// sqrt(\int_e |eta (.) D u|^2) per facet for a flattened corner field.
  Eigen::VectorXd facet_energies_quadrature(const Field& corner_field) const;
  /// ||(D_elem u)_e|| per facet for an element field.
  Eigen::VectorXd facet_energies_element(const Field& element_field) const;
};

FacetWeights uniform_eta(const ExplodedMesh& em, const Eigen::VectorXd& axis_weights);
FacetWeights unit_eta(const ExplodedMesh& em);

DiscontinuityOperator assemble_discontinuity(const ExplodedMesh& em, const FacetWeights& eta);

/// Flatten a row-major field into a vector view (row * d + c).
inline Eigen::Map<const Eigen::VectorXd> flat(const Field& field) {
  return {field.data(), field.size()};
}
inline Eigen::Map<Eigen::VectorXd> flat(Field& field) { return {field.data(), field.size()}; }

}  // namespace fracture
