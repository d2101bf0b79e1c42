#pragma once

#include "fracture/mesh.hpp"
#include "fracture/modes.hpp"

#include <vector>

namespace fracture {

/// Connected components of the element graph once every facet active in some
/// mode is cut. Labels are numbered by each piece's smallest element index.
struct BasePiecePartition {
  std::vector<int> labels;  // element -> piece
  int count = 0;
  std::vector<int> cut_facets;                // interior facet ids, ascending
  std::vector<std::vector<int>> boundary_corners;  // per piece, exploded corner ids on its boundary
  double tolerance = 1e-8;
};

/// Facet e is cut iff max_i |(D_elem U_i)_e| > tolerance.
BasePiecePartition base_pieces(const ExplodedMesh& em, const FractureModes& modes, double tolerance = 1e-8);

/// Partition from explicit per-facet cut flags.
BasePiecePartition partition_from_cuts(const ExplodedMesh& em, const std::vector<bool>& cut, double tolerance);

/// Partition whose cuts are the facets separating differently labelled
/// elements. Labels are renumbered by smallest element.
BasePiecePartition partition_from_labels(const ExplodedMesh& em, const std::vector<int>& labels);

/// One base piece as a standalone solid.
struct Fragment {
  Mesh mesh;                  // compacted vertices, original element order
  std::vector<int> elements;  // fragment element -> original element
  std::vector<int> vertices;  // fragment vertex -> original vertex
};

/// One solid per piece; fragments tile the input element set exactly.
std::vector<Fragment> prefracture(const BasePiecePartition& partition, const Mesh& mesh);

/// Labels recovered from a fragment list, then re-partitioned on the input
/// mesh's adjacency.
BasePiecePartition pieces_from_fragments(const ExplodedMesh& em, const std::vector<Fragment>& fragments);

/// Implicit Laplacian smoothing of per-piece indicator fields on the
/// unexploded mesh, followed by argmax relabeling of elements. Pieces that
/// lose every element disappear; the count never grows. The result is a set
/// of label classes, not necessarily connected.
BasePiecePartition smooth_labels(const ExplodedMesh& em, const BasePiecePartition& partition, double lambda);

}  // namespace fracture
