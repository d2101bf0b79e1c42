#include "fracture/operators.hpp"

#include "fracture/error.hpp"
#include "fracture/log.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace fracture {

namespace {

using Triplet = Eigen::Triplet<double>;

// (d+1) x d matrix of barycentric-coordinate gradients.
Eigen::MatrixXd barycentric_gradients(const Mesh& mesh, int f) {
  const int d = mesh.dimension();
  Eigen::MatrixXd jac(d, d);
  for (int c = 1; c <= d; ++c) {
    jac.col(c - 1) =
        (mesh.vertices.row(mesh.elements(f, c)) - mesh.vertices.row(mesh.elements(f, 0))).transpose();
  }
  const Eigen::MatrixXd inv = jac.inverse();
  Eigen::MatrixXd grads(d + 1, d);
  grads.bottomRows(d) = inv;
  grads.row(0) = -inv.colwise().sum();
  return grads;
}

double element_quality(const Mesh& mesh, int f, double measure) {
  const int d = mesh.dimension();
  double longest = 0.0;
  for (int a = 0; a <= d; ++a) {
    for (int b = a + 1; b <= d; ++b) {
      longest = std::max(longest, (mesh.vertices.row(mesh.elements(f, a)) -
                                   mesh.vertices.row(mesh.elements(f, b))).norm());
    }
  }
  return measure / std::pow(longest, d);
}

}  // namespace

MassMatrix assemble_mass(const ExplodedMesh& em, double density) {
  if (!(density > 0.0)) throw Error(ErrorCode::invalid_argument, "density must be positive");
  const Mesh& mesh = em.base;
  const int d = mesh.dimension();
  const int m = mesh.num_elements();
  MassMatrix mass;
  mass.density = density;
  mass.element.resize(m);
  mass.corner.resize(em.corner_count);
  mass.vertex.assign(mesh.num_vertices(), 0.0);
  for (int f = 0; f < m; ++f) {
    const double mf = density * element_measure(mesh, f);
    mass.element[f] = mf;
    mass.total += mf;
    for (int c = 0; c <= d; ++c) {
      mass.corner[f * (d + 1) + c] = mf / (d + 1);
      mass.vertex[mesh.elements(f, c)] += mf / (d + 1);
    }
  }
  return mass;
}

StiffnessMatrix assemble_stiffness(const ExplodedMesh& em) {
  const Mesh& mesh = em.base;
  const int d = mesh.dimension();
  const int m = mesh.num_elements();
  const int block = (d + 1) * (d + 1);
  std::vector<Triplet> exploded(static_cast<std::size_t>(m) * block);
  std::vector<Triplet> vertex(static_cast<std::size_t>(m) * block);
  std::vector<double> quality(m);

#pragma omp parallel for schedule(static)
  for (int f = 0; f < m; ++f) {
    const double measure = element_measure(mesh, f);
    const Eigen::MatrixXd grads = barycentric_gradients(mesh, f);
    const Eigen::MatrixXd local = measure * grads * grads.transpose();
    quality[f] = element_quality(mesh, f, measure);
    std::size_t at = static_cast<std::size_t>(f) * block;
    for (int a = 0; a <= d; ++a) {
      for (int b = 0; b <= d; ++b, ++at) {
        exploded[at] = Triplet(f * (d + 1) + a, f * (d + 1) + b, local(a, b));
        vertex[at] = Triplet(mesh.elements(f, a), mesh.elements(f, b), local(a, b));
      }
    }
  }

  StiffnessMatrix stiffness;
  stiffness.exploded.resize(em.corner_count, em.corner_count);
  stiffness.exploded.setFromTriplets(exploded.begin(), exploded.end());
  stiffness.vertex.resize(mesh.num_vertices(), mesh.num_vertices());
  stiffness.vertex.setFromTriplets(vertex.begin(), vertex.end());

  const auto worst = std::min_element(quality.begin(), quality.end());
  stiffness.minimum_quality_element = static_cast<int>(worst - quality.begin());
  stiffness.minimum_quality = *worst;
  if (*worst < 1e-6) {
    logger().warn("element {} is nearly degenerate (quality {:.3g}); stiffness is ill-conditioned",
                  stiffness.minimum_quality_element, *worst);
  }
  return stiffness;
}

double StiffnessMatrix::quadratic_form(const Field& corner_field) const {
  double total = 0.0;
  for (Eigen::Index c = 0; c < corner_field.cols(); ++c) {
    const Eigen::VectorXd u = corner_field.col(c);
    total += u.dot(exploded * u);
  }
  return total;
}

ElementTransfer assemble_transfer(const ExplodedMesh& em) {
  ElementTransfer transfer;
  transfer.corners_per_element = em.corners_per_element();
  std::vector<Triplet> entries;
  entries.reserve(em.corner_count);
  for (int corner = 0; corner < em.corner_count; ++corner) {
    entries.emplace_back(corner, corner / transfer.corners_per_element, 1.0);
  }
  transfer.replicate.resize(em.corner_count, em.num_elements());
  transfer.replicate.setFromTriplets(entries.begin(), entries.end());
  return transfer;
}

Field ElementTransfer::to_corners(const Field& element_field) const {
  Field out(replicate.rows(), element_field.cols());
  for (Eigen::Index corner = 0; corner < out.rows(); ++corner) {
    out.row(corner) = element_field.row(corner / corners_per_element);
  }
  return out;
}

Field ElementTransfer::to_elements(const Field& corner_field) const {
  const Eigen::Index m = corner_field.rows() / corners_per_element;
  Field out = Field::Zero(m, corner_field.cols());
  for (Eigen::Index corner = 0; corner < corner_field.rows(); ++corner) {
    out.row(corner / corners_per_element) += corner_field.row(corner);
  }
  out /= static_cast<double>(corners_per_element);
  return out;
}

FacetWeights uniform_eta(const ExplodedMesh& em, const Eigen::VectorXd& axis_weights) {
  if (axis_weights.size() != em.dimension()) {
    throw Error(ErrorCode::invalid_argument, "eta must have one weight per axis");
  }
  if ((axis_weights.array() <= 0.0).any()) {
    throw Error(ErrorCode::invalid_argument, "eta weights must be positive");
  }
  FacetWeights eta(em.num_facets(), em.dimension());
  eta.rowwise() = axis_weights.transpose();
  return eta;
}

FacetWeights unit_eta(const ExplodedMesh& em) {
  return FacetWeights::Ones(em.num_facets(), em.dimension());
}

DiscontinuityOperator assemble_discontinuity(const ExplodedMesh& em, const FacetWeights& eta) {
  const int d = em.dimension();
  const int p = em.num_facets();
  if (eta.rows() != p || eta.cols() != d) {
    throw Error(ErrorCode::invalid_argument, "eta must be (interior facets) x d");
  }
  if ((eta.array() <= 0.0).any()) throw Error(ErrorCode::invalid_argument, "eta weights must be positive");

  DiscontinuityOperator op;
  op.dimension = d;
  op.facets = p;
  op.eta = eta;
  op.quadrature_points = d == 2 ? 2 : 3;
  const int q = op.quadrature_points;

  // Interpolation weights of each facet vertex's corner jump at each point.
  Eigen::MatrixXd rule(q, d);
  if (d == 2) {
    const double t = 1.0 / std::sqrt(3.0);
    rule << (1 + t) / 2, (1 - t) / 2, (1 - t) / 2, (1 + t) / 2;
  } else {
    rule << 0.5, 0.5, 0.0, 0.0, 0.5, 0.5, 0.5, 0.0, 0.5;
  }

  std::vector<Triplet> quad;
  std::vector<Triplet> elem;
  quad.reserve(static_cast<std::size_t>(p) * q * d * d * 2);
  elem.reserve(static_cast<std::size_t>(p) * d * 2);
  for (int e = 0; e < p; ++e) {
    const InteriorFacet& facet = em.interior_facets[e];
    if (!(facet.measure > 0.0)) throw Error(ErrorCode::degenerate_element, "facet with zero measure");
    const double wq = std::sqrt(facet.measure / q);
    const double we = std::sqrt(facet.measure);
    for (int c = 0; c < d; ++c) {
      const double eta_c = eta(e, c);
      for (int s = 0; s < q; ++s) {
        const int row = (s * p + e) * d + c;
        for (int j = 0; j < d; ++j) {
          const double w = wq * eta_c * rule(s, j);
          if (w == 0.0) continue;
          quad.emplace_back(row, facet.corners[j][0] * d + c, w);
          quad.emplace_back(row, facet.corners[j][1] * d + c, -w);
        }
      }
      elem.emplace_back(e * d + c, facet.elements[0] * d + c, we * eta_c);
      elem.emplace_back(e * d + c, facet.elements[1] * d + c, -we * eta_c);
    }
  }
  op.quadrature.resize(static_cast<Eigen::Index>(p) * q * d, static_cast<Eigen::Index>(em.corner_count) * d);
  op.quadrature.setFromTriplets(quad.begin(), quad.end());
  op.element.resize(static_cast<Eigen::Index>(p) * d, static_cast<Eigen::Index>(em.num_elements()) * d);
  op.element.setFromTriplets(elem.begin(), elem.end());
  return op;
}

Eigen::VectorXd DiscontinuityOperator::facet_energies_quadrature(const Field& corner_field) const {
  const Eigen::VectorXd rows = quadrature * flat(corner_field);
  Eigen::VectorXd energy = Eigen::VectorXd::Zero(facets);
  for (int s = 0; s < quadrature_points; ++s) {
    for (int e = 0; e < facets; ++e) {
      energy[e] += rows.segment((static_cast<Eigen::Index>(s) * facets + e) * dimension, dimension).squaredNorm();
    }
  }
  return energy.cwiseSqrt();
}

Eigen::VectorXd DiscontinuityOperator::facet_energies_element(const Field& element_field) const {
  const Eigen::VectorXd rows = element * flat(element_field);
  Eigen::VectorXd energy(facets);
  for (int e = 0; e < facets; ++e) energy[e] = rows.segment(static_cast<Eigen::Index>(e) * dimension, dimension).norm();
  return energy;
}

}  // namespace fracture
