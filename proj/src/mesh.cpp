#include "fracture/mesh.hpp"

#include "fracture/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

namespace fracture {

namespace {

struct FacetRecord {
  std::array<int, 3> key;
  int element;
  int omitted;
};

// Every (element, omitted-corner) facet keyed by its sorted vertex ids.
std::vector<FacetRecord> enumerate_facets(const Mesh& mesh) {
  const int d = mesh.dimension();
  const int m = mesh.num_elements();
  std::vector<FacetRecord> records;
  records.reserve(static_cast<std::size_t>(m) * (d + 1));
  for (int f = 0; f < m; ++f) {
    for (int omit = 0; omit <= d; ++omit) {
      FacetRecord rec{{-1, -1, -1}, f, omit};
      int j = 0;
      for (int c = 0; c <= d; ++c) {
        if (c != omit) rec.key[j++] = mesh.elements(f, c);
      }
      std::sort(rec.key.begin(), rec.key.begin() + d);
      records.push_back(rec);
    }
  }
  std::sort(records.begin(), records.end(), [](const FacetRecord& a, const FacetRecord& b) {
    if (a.key != b.key) return a.key < b.key;
    if (a.element != b.element) return a.element < b.element;
    return a.omitted < b.omitted;
  });
  return records;
}

template <typename Visit>
void for_each_facet_group(const std::vector<FacetRecord>& records, Visit&& visit) {
  std::size_t i = 0;
  while (i < records.size()) {
    std::size_t j = i + 1;
    while (j < records.size() && records[j].key == records[i].key) ++j;
    visit(i, j);
    i = j;
  }
}

double facet_measure(const Mesh& mesh, const std::array<int, 3>& key) {
  const int d = mesh.dimension();
  if (d == 2) {
    return (mesh.vertices.row(key[1]) - mesh.vertices.row(key[0])).norm();
  }
  Eigen::Vector3d a = mesh.vertices.row(key[0]).transpose();
  Eigen::Vector3d b = mesh.vertices.row(key[1]).transpose();
  Eigen::Vector3d c = mesh.vertices.row(key[2]).transpose();
  return 0.5 * (b - a).cross(c - a).norm();
}

}  // namespace

double element_measure(const Mesh& mesh, int f) {
  const int d = mesh.dimension();
  Eigen::MatrixXd edges(d, d);
  for (int c = 1; c <= d; ++c) {
    edges.col(c - 1) =
        (mesh.vertices.row(mesh.elements(f, c)) - mesh.vertices.row(mesh.elements(f, 0))).transpose();
  }
  return edges.determinant() / (d == 2 ? 2.0 : 6.0);
}

BoundingBox bounding_box(const Mesh& mesh) {
  return {mesh.vertices.colwise().minCoeff().transpose(),
          mesh.vertices.colwise().maxCoeff().transpose()};
}

double bounding_diagonal(const Mesh& mesh) {
  if (mesh.num_vertices() == 0) return 0.0;
  const BoundingBox box = bounding_box(mesh);
  return (box.max - box.min).norm();
}

Mesh make_mesh(Vertices vertices, Elements elements) {
  const auto d = vertices.cols();
  if (d != 2 && d != 3) {
    throw Error(ErrorCode::invalid_mesh, "mesh dimension must be 2 or 3");
  }
  if (elements.cols() != d + 1) {
    throw Error(ErrorCode::non_simplicial, "non-simplicial element");
  }
  if (elements.rows() == 0) {
    throw Error(ErrorCode::invalid_mesh, "mesh has no elements");
  }
  Mesh mesh{std::move(vertices), std::move(elements)};
  const int n = mesh.num_vertices();
  std::vector<char> referenced(n, 0);
  for (int f = 0; f < mesh.num_elements(); ++f) {
    for (int c = 0; c <= d; ++c) {
      const int v = mesh.elements(f, c);
      if (v < 0 || v >= n) {
        throw Error(ErrorCode::out_of_range,
                    "element " + std::to_string(f) + " references vertex " + std::to_string(v) +
                        " outside [0, " + std::to_string(n) + ")");
      }
      referenced[v] = 1;
    }
  }
  for (int v = 0; v < n; ++v) {
    if (!referenced[v]) {
      throw Error(ErrorCode::invalid_mesh,
                  "vertex " + std::to_string(v) + " is not referenced by any element");
    }
  }

  const double scale = std::pow(bounding_diagonal(mesh), static_cast<double>(d));
  for (int f = 0; f < mesh.num_elements(); ++f) {
    double measure = element_measure(mesh, f);
    if (std::abs(measure) <= 1e-12 * scale) {
      throw Error(ErrorCode::degenerate_element, "degenerate element " + std::to_string(f));
    }
    if (measure < 0) std::swap(mesh.elements(f, d - 1), mesh.elements(f, d));
  }

  const auto records = enumerate_facets(mesh);
  for_each_facet_group(records, [&](std::size_t begin, std::size_t end) {
    if (end - begin > 2) {
      throw Error(ErrorCode::non_manifold,
                  "non-manifold facet shared by " + std::to_string(end - begin) + " elements");
    }
  });
  return mesh;
}

ExplodedMesh explode(const Mesh& mesh) {
  const int d = mesh.dimension();
  const int m = mesh.num_elements();
  ExplodedMesh em;
  em.base = mesh;
  em.corner_count = (d + 1) * m;
  em.corner_to_vertex.resize(em.corner_count);
  for (int f = 0; f < m; ++f) {
    for (int c = 0; c <= d; ++c) em.corner_to_vertex[f * (d + 1) + c] = mesh.elements(f, c);
  }

  auto corner_of = [&](int f, int vertex) {
    for (int c = 0; c <= d; ++c) {
      if (mesh.elements(f, c) == vertex) return f * (d + 1) + c;
    }
    return -1;
  };

  const auto records = enumerate_facets(mesh);
  for_each_facet_group(records, [&](std::size_t begin, std::size_t end) {
    const std::size_t count = end - begin;
    if (count == 1) {
      em.boundary_facets.push_back({records[begin].element, records[begin].omitted});
      return;
    }
    if (count > 2) {
      throw Error(ErrorCode::non_manifold, "non-manifold facet");
    }
    InteriorFacet facet;
    facet.elements = {records[begin].element, records[begin + 1].element};
    facet.vertices = records[begin].key;
    for (int j = 0; j < d; ++j) {
      facet.corners[j] = {corner_of(facet.elements[0], facet.vertices[j]),
                          corner_of(facet.elements[1], facet.vertices[j])};
    }
    facet.measure = facet_measure(mesh, facet.vertices);
    if (!(facet.measure > 0.0)) {
      throw Error(ErrorCode::degenerate_element, "interior facet with zero measure");
    }
    em.interior_facets.push_back(facet);
  });

  std::vector<int> counts(m + 1, 0);
  for (const auto& facet : em.interior_facets) {
    ++counts[facet.elements[0] + 1];
    ++counts[facet.elements[1] + 1];
  }
  for (int f = 0; f < m; ++f) counts[f + 1] += counts[f];
  em.element_facet_offsets = counts;
  em.element_facet_ids.resize(counts[m]);
  em.element_facet_sides.resize(counts[m]);
  std::vector<int> cursor(counts.begin(), counts.end() - 1);
  for (int e = 0; e < em.num_facets(); ++e) {
    for (int side = 0; side < 2; ++side) {
      const int f = em.interior_facets[e].elements[side];
      em.element_facet_ids[cursor[f]] = e;
      em.element_facet_sides[cursor[f]] = side;
      ++cursor[f];
    }
  }
  return em;
}

}  // namespace fracture
