#include "fracture/pattern.hpp"

#include "fracture/error.hpp"
#include "fracture/operators.hpp"
#include "fracture/union_find.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <map>

namespace fracture {

namespace {

void fill_boundary_corners(const ExplodedMesh& em, BasePiecePartition& partition) {
  const int d = em.dimension();
  const int cpe = d + 1;
  partition.boundary_corners.assign(partition.count, {});
  std::vector<char> marked(static_cast<std::size_t>(em.corner_count), 0);
  auto mark_face = [&](int f, int omitted) {
    for (int c = 0; c < cpe; ++c) {
      if (c != omitted) marked[f * cpe + c] = 1;
    }
  };
  for (const BoundaryFacet& b : em.boundary_facets) mark_face(b.element, b.omitted);
  for (int e : partition.cut_facets) {
    const InteriorFacet& facet = em.interior_facets[e];
    for (int j = 0; j < d; ++j) {
      marked[facet.corners[j][0]] = 1;
      marked[facet.corners[j][1]] = 1;
    }
  }
  for (int corner = 0; corner < em.corner_count; ++corner) {
    if (marked[corner]) partition.boundary_corners[partition.labels[corner / cpe]].push_back(corner);
  }
}

}  // namespace

BasePiecePartition partition_from_cuts(const ExplodedMesh& em, const std::vector<bool>& cut, double tolerance) {
  if (static_cast<int>(cut.size()) != em.num_facets()) {
    throw Error(ErrorCode::invalid_argument, "cut flags do not match the facet count");
  }
  UnionFind sets(em.num_elements());
  BasePiecePartition partition;
  partition.tolerance = tolerance;
  for (int e = 0; e < em.num_facets(); ++e) {
    if (cut[e]) {
      partition.cut_facets.push_back(e);
    } else {
      sets.unite(em.interior_facets[e].elements[0], em.interior_facets[e].elements[1]);
    }
  }
  partition.labels = sets.labels(&partition.count);
  // A cut facet inside one component does not separate anything.
  std::erase_if(partition.cut_facets, [&](int e) {
    const InteriorFacet& facet = em.interior_facets[e];
    return partition.labels[facet.elements[0]] == partition.labels[facet.elements[1]];
  });
  fill_boundary_corners(em, partition);
  return partition;
}

BasePiecePartition base_pieces(const ExplodedMesh& em, const FractureModes& modes, double tolerance) {
  if (modes.facets != em.num_facets() || modes.elements != em.num_elements()) {
    throw Error(ErrorCode::mesh_mismatch, "modes do not belong to this mesh");
  }
  std::vector<bool> cut(em.num_facets(), false);
  for (const Eigen::VectorXd& jumps : modes.facet_jumps) {
    for (int e = 0; e < em.num_facets(); ++e) {
      if (jumps[e] > tolerance) cut[e] = true;
    }
  }
  return partition_from_cuts(em, cut, tolerance);
}

BasePiecePartition partition_from_labels(const ExplodedMesh& em, const std::vector<int>& labels) {
  if (static_cast<int>(labels.size()) != em.num_elements()) {
    throw Error(ErrorCode::invalid_argument, "label count does not match the element count");
  }
  std::vector<bool> cut(em.num_facets());
  for (int e = 0; e < em.num_facets(); ++e) {
    const InteriorFacet& facet = em.interior_facets[e];
    cut[e] = labels[facet.elements[0]] != labels[facet.elements[1]];
  }
  return partition_from_cuts(em, cut, 0.0);
}

std::vector<Fragment> prefracture(const BasePiecePartition& partition, const Mesh& mesh) {
  if (static_cast<int>(partition.labels.size()) != mesh.num_elements()) {
    throw Error(ErrorCode::mesh_mismatch, "partition does not belong to this mesh");
  }
  const int d = mesh.dimension();
  std::vector<Fragment> fragments(partition.count);
  for (int f = 0; f < mesh.num_elements(); ++f) fragments[partition.labels[f]].elements.push_back(f);

  std::vector<int> local(mesh.num_vertices(), -1);
  for (Fragment& fragment : fragments) {
    for (int f : fragment.elements) {
      for (int c = 0; c <= d; ++c) {
        const int v = mesh.elements(f, c);
        if (local[v] < 0) {
          local[v] = static_cast<int>(fragment.vertices.size());
          fragment.vertices.push_back(v);
        }
      }
    }
    Vertices vertices(static_cast<Eigen::Index>(fragment.vertices.size()), d);
    for (std::size_t i = 0; i < fragment.vertices.size(); ++i) vertices.row(i) = mesh.vertices.row(fragment.vertices[i]);
    Elements elements(static_cast<Eigen::Index>(fragment.elements.size()), d + 1);
    for (std::size_t i = 0; i < fragment.elements.size(); ++i) {
      for (int c = 0; c <= d; ++c) elements(i, c) = local[mesh.elements(fragment.elements[i], c)];
    }
    fragment.mesh = make_mesh(std::move(vertices), std::move(elements));
    for (int v : fragment.vertices) local[v] = -1;
  }
  return fragments;
}

BasePiecePartition pieces_from_fragments(const ExplodedMesh& em, const std::vector<Fragment>& fragments) {
  std::vector<int> labels(em.num_elements(), -1);
  for (std::size_t i = 0; i < fragments.size(); ++i) {
    for (int f : fragments[i].elements) {
      if (f < 0 || f >= em.num_elements() || labels[f] >= 0) {
        throw Error(ErrorCode::invalid_argument, "fragments do not tile the mesh");
      }
      labels[f] = static_cast<int>(i);
    }
  }
  if (std::find(labels.begin(), labels.end(), -1) != labels.end()) {
    throw Error(ErrorCode::invalid_argument, "fragments do not cover the mesh");
  }
  return partition_from_labels(em, labels);
}

BasePiecePartition smooth_labels(const ExplodedMesh& em, const BasePiecePartition& partition, double lambda) {
  if (!(lambda >= 0.0)) throw Error(ErrorCode::invalid_argument, "smoothing step must be non-negative");
  if (lambda == 0.0 || partition.count <= 1) return partition;
  const Mesh& mesh = em.base;
  const int d = mesh.dimension();
  const int n = mesh.num_vertices();
  const int m = mesh.num_elements();
  const MassMatrix mass = assemble_mass(em, 1.0);
  const StiffnessMatrix stiffness = assemble_stiffness(em);

  // Mass-weighted average of one-hot element labels onto vertices.
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(n, partition.count);
  Eigen::VectorXd weight = Eigen::VectorXd::Zero(n);
  for (int f = 0; f < m; ++f) {
    for (int c = 0; c <= d; ++c) {
      const int v = mesh.elements(f, c);
      z(v, partition.labels[f]) += mass.element[f];
      weight[v] += mass.element[f];
    }
  }
  for (int v = 0; v < n; ++v) z.row(v) /= weight[v];

  SparseMatrix system = stiffness.vertex * lambda;
  Eigen::VectorXd vertex_mass = Eigen::Map<const Eigen::VectorXd>(mass.vertex.data(), n);
  for (int v = 0; v < n; ++v) system.coeffRef(v, v) += vertex_mass[v];
  Eigen::SimplicialLDLT<SparseMatrix> solver(system);
  if (solver.info() != Eigen::Success) throw Error(ErrorCode::not_converged, "smoothing factorization failed");
  Eigen::MatrixXd smoothed = solver.solve(vertex_mass.asDiagonal() * z);
  smoothed = smoothed.cwiseMax(0.0).cwiseMin(1.0);

  std::vector<int> labels(m);
  for (int f = 0; f < m; ++f) {
    Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(partition.count);
    for (int c = 0; c <= d; ++c) mean += smoothed.row(mesh.elements(f, c));
    int best = 0;
    for (int j = 1; j < partition.count; ++j) {
      if (mean[j] > mean[best]) best = j;
    }
    labels[f] = best;
  }

  // Renumber surviving classes by smallest element, keep classes (not
  // components) so no piece is ever split.
  std::map<int, int> renumber;
  for (int f = 0; f < m; ++f) renumber.try_emplace(labels[f], static_cast<int>(renumber.size()));
  for (int& label : labels) label = renumber[label];
  BasePiecePartition out;
  out.tolerance = partition.tolerance;
  out.labels = std::move(labels);
  out.count = static_cast<int>(renumber.size());
  for (int e = 0; e < em.num_facets(); ++e) {
    const InteriorFacet& facet = em.interior_facets[e];
    if (out.labels[facet.elements[0]] != out.labels[facet.elements[1]]) out.cut_facets.push_back(e);
  }
  fill_boundary_corners(em, out);
  return out;
}

}  // namespace fracture
