#include "fracture/impact.hpp"

#include "fracture/error.hpp"
#include "fracture/operators.hpp"
#include "fracture/union_find.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>

namespace fracture {

const char* to_string(ImpactMethod method) { return method == ImpactMethod::modal ? "modal" : "lsq"; }

ImpactMethod parse_impact_method(const std::string& name) {
  if (name == "modal") return ImpactMethod::modal;
  if (name == "lsq") return ImpactMethod::lsq;
  throw Error(ErrorCode::invalid_argument, "unknown impact method '" + name + "' (expected modal or lsq)");
}

int nearest_vertex(const Mesh& mesh, const Eigen::VectorXd& point) {
  int best = 0;
  double best_distance = std::numeric_limits<double>::infinity();
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const double distance = (mesh.vertices.row(v).transpose() - point).squaredNorm();
    if (distance < best_distance) {
      best_distance = distance;
      best = v;
    }
  }
  return best;
}

std::vector<std::pair<int, double>> impulse_weights(const Mesh& mesh, const Eigen::VectorXd& point, bool barycentric) {
  if (!barycentric) return {{nearest_vertex(mesh, point), 1.0}};
  const int d = mesh.dimension();
  int best = 0;
  double best_min = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_weights;
  for (int f = 0; f < mesh.num_elements(); ++f) {
    Eigen::MatrixXd edges(d, d);
    const Eigen::VectorXd origin = mesh.vertices.row(mesh.elements(f, 0)).transpose();
    for (int c = 1; c <= d; ++c) edges.col(c - 1) = mesh.vertices.row(mesh.elements(f, c)).transpose() - origin;
    const Eigen::VectorXd tail = edges.partialPivLu().solve(point - origin);
    Eigen::VectorXd weights(d + 1);
    weights[0] = 1.0 - tail.sum();
    weights.tail(d) = tail;
    const double lowest = weights.minCoeff();
    if (lowest > best_min) {
      best_min = lowest;
      best = f;
      best_weights = weights;
    }
    if (lowest >= -1e-12) break;
  }
  best_weights = best_weights.cwiseMax(0.0);
  best_weights /= best_weights.sum();
  std::vector<std::pair<int, double>> out;
  for (int c = 0; c <= d; ++c) {
    if (best_weights[c] > 0.0) out.emplace_back(mesh.elements(best, c), best_weights[c]);
  }
  return out;
}

namespace {

struct VertexOperators {
  SparseMatrix laplacian;
  Eigen::VectorXd mass;
};

VertexOperators vertex_operators(const Mesh& mesh) {
  const ExplodedMesh em = explode(mesh);
  const MassMatrix mass = assemble_mass(em, 1.0);
  return {assemble_stiffness(em).vertex, Eigen::Map<const Eigen::VectorXd>(mass.vertex.data(), mesh.num_vertices())};
}

SparseMatrix shock_system(const SparseMatrix& laplacian, const Eigen::VectorXd& mass, double tau) {
  if (!(tau > 0.0)) throw Error(ErrorCode::invalid_argument, "tau must be positive");
  SparseMatrix system = tau * laplacian;
  for (Eigen::Index v = 0; v < mass.size(); ++v) system.coeffRef(v, v) += mass[v];
  system.makeCompressed();
  return system;
}

}  // namespace

Eigen::VectorXd shockwave_filter(const Mesh& mesh, const Eigen::VectorXd& point, double tau, bool barycentric) {
  const VertexOperators ops = vertex_operators(mesh);
  Eigen::SimplicialLDLT<SparseMatrix> solver(shock_system(ops.laplacian, ops.mass, tau));
  if (solver.info() != Eigen::Success) throw Error(ErrorCode::not_converged, "shockwave system is singular");
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(mesh.num_vertices());
  for (const auto& [v, w] : impulse_weights(mesh, point, barycentric)) rhs[v] += w * ops.mass[v];
  return solver.solve(rhs);
}

Eigen::VectorXd gaussian_filter(const Mesh& mesh, const Eigen::VectorXd& point, double bandwidth) {
  if (!(bandwidth > 0.0)) throw Error(ErrorCode::invalid_argument, "bandwidth must be positive");
  Eigen::VectorXd g(mesh.num_vertices());
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    g[v] = std::exp(-(mesh.vertices.row(v).transpose() - point).squaredNorm() / (2.0 * bandwidth * bandwidth));
  }
  return g;
}

struct ProjectionCache::Solver {
  Eigen::SimplicialLDLT<SparseMatrix> ldlt;
  // Row v, column i * d + c: sum over elements f containing v of
  // U_i(f)_c * |f| / (d + 1), i.e. U_i^T C^T M~ restricted to vertex v.
  Eigen::MatrixXd transfer;
};

ProjectionCache::ProjectionCache(const Mesh& mesh, const FractureModes& modes, const BasePiecePartition& pieces,
                                 CacheOptions options)
    : mesh_(mesh),
      dimension_(mesh.dimension()),
      modes_(modes.k()),
      options_(options),
      pieces_(pieces),
      fields_(modes.fields),
      element_mass_(modes.element_masses),
      solver_(std::make_unique<Solver>()) {
  const int d = dimension_;
  const int n = mesh.num_vertices();
  const int m = mesh.num_elements();
  const int k = modes_;
  if (modes.dimension != d || modes.elements != m || static_cast<int>(pieces.labels.size()) != m) {
    throw Error(ErrorCode::mesh_mismatch, "modes or pieces do not belong to this mesh");
  }
  const ExplodedMesh em = explode(mesh);

  vertex_mass_ = Eigen::VectorXd::Zero(n);
  for (int f = 0; f < m; ++f) {
    for (int c = 0; c <= d; ++c) vertex_mass_[mesh.elements(f, c)] += element_mass_[f] / (d + 1);
  }

  piece_mass_.assign(pieces.count, 0.0);
  piece_modes_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(pieces.count) * d, k);
  for (int f = 0; f < m; ++f) {
    const int a = pieces.labels[f];
    piece_mass_[a] += element_mass_[f];
    for (int i = 0; i < k; ++i) {
      for (int c = 0; c < d; ++c) piece_modes_(a * d + c, i) += element_mass_[f] * fields_[i](f, c);
    }
  }
  for (int a = 0; a < pieces.count; ++a) piece_modes_.middleRows(a * d, d) /= piece_mass_[a];

  for (const InteriorFacet& facet : em.interior_facets) {
    int a = pieces.labels[facet.elements[0]], b = pieces.labels[facet.elements[1]];
    if (a == b) continue;
    if (b < a) std::swap(a, b);
    piece_edges_.push_back({a, b});
  }
  std::sort(piece_edges_.begin(), piece_edges_.end());
  piece_edges_.erase(std::unique(piece_edges_.begin(), piece_edges_.end()), piece_edges_.end());

  std::vector<char> on_boundary(n, 0);
  for (const BoundaryFacet& b : em.boundary_facets) {
    for (int c = 0; c <= d; ++c) {
      if (c != b.omitted) on_boundary[mesh.elements(b.element, c)] = 1;
    }
  }
  for (int v = 0; v < n; ++v) {
    if (on_boundary[v]) boundary_vertices_.push_back(v);
  }

  const BoundingBox box = bounding_box(mesh);
  box_min_ = box.min;
  box_max_ = box.max;
  diagonal_ = (box.max - box.min).norm();

  Eigen::MatrixXd& transfer = solver_->transfer;
  transfer = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(k) * d);
  for (int f = 0; f < m; ++f) {
    const double share = element_mass_[f] / (d + 1);
    for (int corner = 0; corner <= d; ++corner) {
      const int v = mesh.elements(f, corner);
      for (int i = 0; i < k; ++i) {
        for (int c = 0; c < d; ++c) transfer(v, i * d + c) += share * fields_[i](f, c);
      }
    }
  }

  const StiffnessMatrix stiffness = assemble_stiffness(em);
  solver_->ldlt.compute(shock_system(stiffness.vertex, vertex_mass_, options_.tau));
  if (solver_->ldlt.info() != Eigen::Success) throw Error(ErrorCode::not_converged, "shockwave system is singular");

  // A^T = M (M + tau L)^{-1} P^T by symmetry: k * d solves.
  const Eigen::MatrixXd solved = k > 0 ? Eigen::MatrixXd(solver_->ldlt.solve(transfer)) : Eigen::MatrixXd(n, 0);
  impulse_ = vertex_mass_.asDiagonal() * solved;
}

ProjectionCache::~ProjectionCache() = default;
ProjectionCache::ProjectionCache(ProjectionCache&&) noexcept = default;
ProjectionCache& ProjectionCache::operator=(ProjectionCache&&) noexcept = default;

void ProjectionCache::validate(const ImpactQuery& query) const {
  const int d = dimension_;
  if (query.point.size() != d || query.normal.size() != d) {
    throw Error(ErrorCode::invalid_argument, "impact point and normal must have " + std::to_string(d) + " components");
  }
  if (!query.point.allFinite() || !query.normal.allFinite() || !std::isfinite(query.magnitude)) {
    throw Error(ErrorCode::invalid_argument, "impact query has non-finite values");
  }
  if (std::abs(query.normal.norm() - 1.0) > 1e-9) throw Error(ErrorCode::invalid_argument, "impact normal must be unit length");
  if (!(query.sigma > 0.0)) throw Error(ErrorCode::invalid_argument, "sigma must be positive");
  const double slack = 0.1 * diagonal_;
  const Eigen::VectorXd below = (box_min_ - query.point).cwiseMax(0.0);
  const Eigen::VectorXd above = (query.point - box_max_).cwiseMax(0.0);
  if ((below + above).maxCoeff() > slack) throw Error(ErrorCode::off_body, "impact off-body");
}

Eigen::VectorXd ProjectionCache::coefficients(const ImpactQuery& query) const {
  const int d = dimension_;
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(modes_);
  auto accumulate = [&](const auto& rows, int v, double weight) {
    for (int i = 0; i < modes_; ++i) {
      double sum = 0.0;
      for (int c = 0; c < d; ++c) sum += query.normal[c] * rows(v, i * d + c);
      alpha[i] += weight * sum;
    }
  };
  if (options_.filter == ImpactFilter::shockwave) {
    for (const auto& [v, w] : impulse_weights(mesh_, query.point, options_.barycentric)) accumulate(impulse_, v, w);
  } else {
    const Eigen::VectorXd g = gaussian_filter(mesh_, query.point, options_.bandwidth);
    for (int v = 0; v < mesh_.num_vertices(); ++v) {
      if (g[v] != 0.0) accumulate(solver_->transfer, v, g[v]);
    }
  }
  return alpha * query.magnitude;
}

Field ProjectionCache::project(const ImpactQuery& query) const {
  const Eigen::VectorXd values = piece_modes_ * coefficients(query);
  return Eigen::Map<const Field>(values.data(), pieces_.count, dimension_);
}

Eigen::VectorXd ProjectionCache::smear(const Eigen::VectorXd& point) const {
  if (options_.filter == ImpactFilter::gaussian) return gaussian_filter(mesh_, point, options_.bandwidth);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(mesh_.num_vertices());
  for (const auto& [v, w] : impulse_weights(mesh_, point, options_.barycentric)) rhs[v] += w * vertex_mass_[v];
  return solver_->ldlt.solve(rhs);
}

Field ProjectionCache::piece_means(const Field& element_field) const {
  Field out = Field::Zero(pieces_.count, dimension_);
  for (int f = 0; f < mesh_.num_elements(); ++f) out.row(pieces_.labels[f]) += element_mass_[f] * element_field.row(f);
  for (int a = 0; a < pieces_.count; ++a) out.row(a) /= piece_mass_[a];
  return out;
}

Field ProjectionCache::project_explicit(const ImpactQuery& query) const {
  const int d = dimension_;
  const int m = mesh_.num_elements();
  const Eigen::VectorXd g = smear(query.point) * query.magnitude;

  // w~ on corners is g(v) n; <C U_i, w~>_{M~} sums corner masses.
  Field projected = Field::Zero(m, d);
  for (int i = 0; i < modes_; ++i) {
    double alpha = 0.0;
    for (int f = 0; f < m; ++f) {
      double corner_sum = 0.0;
      for (int c = 0; c <= d; ++c) corner_sum += g[mesh_.elements(f, c)];
      alpha += element_mass_[f] / (d + 1) * corner_sum * fields_[i].row(f).dot(query.normal.transpose());
    }
    projected += alpha * fields_[i];
  }
  return piece_means(projected);
}

Field ProjectionCache::lsq_project(const ImpactQuery& query) const {
  const int d = dimension_;
  const int m = mesh_.num_elements();
  const Eigen::VectorXd g = smear(query.point) * query.magnitude;
  Field element_field(m, d);
  for (int f = 0; f < m; ++f) {
    double mean = 0.0;
    for (int c = 0; c <= d; ++c) mean += g[mesh_.elements(f, c)];
    element_field.row(f) = mean / (d + 1) * query.normal.transpose();
  }
  return piece_means(element_field);
}

FracturePattern ProjectionCache::glue(const Field& piece_values, double sigma) const {
  if (!(sigma > 0.0)) throw Error(ErrorCode::invalid_argument, "sigma must be positive");
  if (piece_values.rows() != pieces_.count || piece_values.cols() != dimension_) {
    throw Error(ErrorCode::invalid_argument, "piece values have the wrong shape");
  }
  UnionFind sets(pieces_.count);
  for (const auto& [a, b] : piece_edges_) {
    if ((piece_values.row(a) - piece_values.row(b)).norm() < sigma) sets.unite(a, b);
  }
  FracturePattern pattern;
  pattern.piece_labels = sets.labels(&pattern.count);
  pattern.labels.resize(mesh_.num_elements());
  for (int f = 0; f < mesh_.num_elements(); ++f) pattern.labels[f] = pattern.piece_labels[pieces_.labels[f]];

  pattern.translations = Field::Zero(pattern.count, dimension_);
  std::vector<double> mass(pattern.count, 0.0);
  for (int a = 0; a < pieces_.count; ++a) {
    const int j = pattern.piece_labels[a];
    pattern.translations.row(j) += piece_mass_[a] * piece_values.row(a);
    mass[j] += piece_mass_[a];
  }
  for (int j = 0; j < pattern.count; ++j) pattern.translations.row(j) /= mass[j];
  return pattern;
}

FracturePattern ProjectionCache::apply(const ImpactQuery& query) const {
  validate(query);
  const Field values = query.method == ImpactMethod::modal ? project(query) : lsq_project(query);
  FracturePattern pattern = glue(values, query.sigma);
  pattern.query = query;
  return pattern;
}

ProjectionCache build_projection_cache(const ModesArtifact& artifact, const Mesh& mesh, CacheOptions options) {
  check_artifact_mesh(artifact, mesh);
  const ExplodedMesh em = explode(mesh);
  std::vector<bool> cut(em.num_facets(), false);
  for (int e : artifact.pieces.cut_facets) cut[e] = true;
  const BasePiecePartition pieces = partition_from_cuts(em, cut, artifact.pieces.tolerance);
  if (pieces.labels != artifact.pieces.labels) {
    throw Error(ErrorCode::mesh_mismatch, "artifact base pieces do not match its cut facets on this mesh");
  }
  return ProjectionCache(mesh, artifact.modes, pieces, options);
}

Field project_field(const FractureModes& modes, const Field& element_field) {
  Field out = Field::Zero(element_field.rows(), element_field.cols());
  for (const Field& mode : modes.fields) out += mass_inner(mode, element_field, modes.element_masses) * mode;
  return out;
}

}  // namespace fracture
