#pragma once

#include <Eigen/Core>

#include <array>
#include <span>
#include <vector>

namespace fracture {

/// n x d vertex positions, one row per vertex.
using Vertices = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
/// m x (d+1) zero-based vertex indices, one row per simplex.
using Elements = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Simplicial solid: triangles in 2D, tetrahedra in 3D.
///
/// Construct through `make_mesh`, which validates index ranges, rejects
/// degenerate and non-manifold elements, and flips negatively oriented
/// simplices so every element has positive signed measure.
struct Mesh {
  Vertices vertices;
  Elements elements;

  int dimension() const { return static_cast<int>(vertices.cols()); }
  int num_vertices() const { return static_cast<int>(vertices.rows()); }
  int num_elements() const { return static_cast<int>(elements.rows()); }
};

Mesh make_mesh(Vertices vertices, Elements elements);

/// Signed measure (area in 2D, volume in 3D) of element `f`.
double element_measure(const Mesh& mesh, int f);

/// Bounding box diagonal length.
double bounding_diagonal(const Mesh& mesh);

struct BoundingBox {
  Eigen::VectorXd min;
  Eigen::VectorXd max;
};
BoundingBox bounding_box(const Mesh& mesh);

/// An interior facet shared by exactly two elements.
///
/// `vertices` holds the facet's original vertex ids in ascending order (d of
/// them; the third slot is -1 in 2D). `corners[j]` is the matched pair of
/// exploded corner ids {corner of elements[0], corner of elements[1]} for
/// `vertices[j]`.
struct InteriorFacet {
  std::array<int, 2> elements{};
  std::array<int, 3> vertices{-1, -1, -1};
  std::array<std::array<int, 2>, 3> corners{};
  double measure = 0.0;
};

struct BoundaryFacet {
  int element = 0;
  int omitted = 0;  // local index of the corner opposite the facet
};

/// Mesh with every vertex duplicated per incident element.
///
/// Corner id of local vertex c in element f is f * (d + 1) + c.
struct ExplodedMesh {
  Mesh base;
  int corner_count = 0;
  std::vector<int> corner_to_vertex;
  std::vector<InteriorFacet> interior_facets;
  std::vector<BoundaryFacet> boundary_facets;

  // Element -> incident interior facets, CSR layout. side is 0 when the
  // element is facet.elements[0] and 1 otherwise.
  std::vector<int> element_facet_offsets;
  std::vector<int> element_facet_ids;
  std::vector<int> element_facet_sides;

  int dimension() const { return base.dimension(); }
  int num_elements() const { return base.num_elements(); }
  int num_facets() const { return static_cast<int>(interior_facets.size()); }
  int corners_per_element() const { return base.dimension() + 1; }

  std::span<const int> facets_of(int f) const {
    return {element_facet_ids.data() + element_facet_offsets[f],
            element_facet_ids.data() + element_facet_offsets[f + 1]};
  }
  std::span<const int> sides_of(int f) const {
    return {element_facet_sides.data() + element_facet_offsets[f],
            element_facet_sides.data() + element_facet_offsets[f + 1]};
  }
};

ExplodedMesh explode(const Mesh& mesh);

}  // namespace fracture
