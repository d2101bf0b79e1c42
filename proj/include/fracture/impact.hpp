#pragma once

#include "fracture/artifact.hpp"
#include "fracture/mesh.hpp"
#include "fracture/modes.hpp"
#include "fracture/pattern.hpp"

#include <Eigen/Core>

#include <memory>
#include <vector>

namespace fracture {

enum class ImpactMethod { modal, lsq };
enum class ImpactFilter { shockwave, gaussian };

const char* to_string(ImpactMethod method);
ImpactMethod parse_impact_method(const std::string& name);

struct ImpactQuery {
  Eigen::VectorXd point;
  Eigen::VectorXd normal;  // unit length
  double sigma = 1e-3;
  double magnitude = 1.0;
  ImpactMethod method = ImpactMethod::modal;
};

struct CacheOptions {
  double tau = 1e-2;
  // Spread the impulse over the containing element's vertices by
  // barycentric weights instead of snapping to the nearest vertex.
  bool barycentric = false;
  ImpactFilter filter = ImpactFilter::shockwave;
  double bandwidth = 0.1;  // Gaussian filter width, in mesh units
};

struct FracturePattern {
  std::vector<int> labels;       // element -> fragment
  std::vector<int> piece_labels; // base piece -> fragment
  int count = 0;
  Field translations;  // count x d, mass-weighted mean of the projected field
  ImpactQuery query;
};

/// Nearest mesh vertex to `point`.
int nearest_vertex(const Mesh& mesh, const Eigen::VectorXd& point);

/// Vertex impulse distribution for `point`: a single 1 at the nearest vertex,
/// or barycentric weights on the containing (or nearest) element.
std::vector<std::pair<int, double>> impulse_weights(const Mesh& mesh, const Eigen::VectorXd& point, bool barycentric);

/// g = (M + tau L)^{-1} M delta_p on the unexploded mesh.
Eigen::VectorXd shockwave_filter(const Mesh& mesh, const Eigen::VectorXd& point, double tau,
                                 bool barycentric = false);

/// g_v = exp(-|x_v - p|^2 / (2 h^2)).
Eigen::VectorXd gaussian_filter(const Mesh& mesh, const Eigen::VectorXd& point, double bandwidth);

/// Precomputed impact-to-mode map and base-piece restriction of the modes.
/// Immutable after construction; queries are safe from multiple threads.
class ProjectionCache {
 public:
  ProjectionCache(const Mesh& mesh, const FractureModes& modes, const BasePiecePartition& pieces,
                  CacheOptions options = {});
  ~ProjectionCache();
  ProjectionCache(ProjectionCache&&) noexcept;
  ProjectionCache& operator=(ProjectionCache&&) noexcept;

  int dimension() const { return dimension_; }
  int num_modes() const { return modes_; }
  int num_pieces() const { return pieces_.count; }
  const Mesh& mesh() const { return mesh_; }
  const BasePiecePartition& pieces() const { return pieces_; }
  const CacheOptions& options() const { return options_; }
  const std::vector<int>& boundary_vertices() const { return boundary_vertices_; }
  const std::vector<double>& piece_masses() const { return piece_mass_; }
  const std::vector<std::array<int, 2>>& piece_adjacency() const { return piece_edges_; }

  /// Throws off_body if p lies outside the bounding box by more than 10% of
  /// its diagonal; invalid_argument for a non-unit normal or sigma <= 0.
  void validate(const ImpactQuery& query) const;

  /// Modal coefficients alpha_i = < U_i, smear(p) n >_M from the cached rows.
  Eigen::VectorXd coefficients(const ImpactQuery& query) const;

  /// w* per base piece (pieces x d), via the cache. No linear solves.
  Field project(const ImpactQuery& query) const;

  /// Same quantity by smearing explicitly and projecting the element field.
  Field project_explicit(const ImpactQuery& query) const;

  /// Per-piece mass-weighted means of the smeared impact field.
  Field lsq_project(const ImpactQuery& query) const;

  /// Pieces glued across a shared facet when their values differ by < sigma.
  FracturePattern glue(const Field& piece_values, double sigma) const;

  /// Validate, project by the query's method and glue.
  FracturePattern apply(const ImpactQuery& query) const;

  /// Smeared scalar field g for the query point under the cache's filter.
  Eigen::VectorXd smear(const Eigen::VectorXd& point) const;

 private:
  struct Solver;

  Field piece_means(const Field& element_field) const;

  Mesh mesh_;
  int dimension_ = 0;
  int modes_ = 0;
  CacheOptions options_;
  BasePiecePartition pieces_;
  std::vector<Field> fields_;
  std::vector<double> element_mass_;
  Eigen::VectorXd vertex_mass_;
  std::vector<double> piece_mass_;
  std::vector<std::array<int, 2>> piece_edges_;
  std::vector<int> boundary_vertices_;
  Eigen::VectorXd box_min_, box_max_;
  double diagonal_ = 0.0;
  // Row v, column i * d + c: alpha_i contribution of a unit impulse at
  // vertex v along axis c.
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> impulse_;
  // Row a * d + c, column i: mean of U_i's coordinate c over piece a.
  Eigen::MatrixXd piece_modes_;
  std::unique_ptr<Solver> solver_;
};

ProjectionCache build_projection_cache(const ModesArtifact& artifact, const Mesh& mesh, CacheOptions options = {});

/// sum_i U_i <U_i, w>_M for a per-element field.
Field project_field(const FractureModes& modes, const Field& element_field);

}  // namespace fracture
