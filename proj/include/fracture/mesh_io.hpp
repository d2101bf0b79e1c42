#pragma once

#include "fracture/mesh.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace fracture {

/// Parse an ASCII OBJ holding a planar triangle mesh (all z = 0 within 1e-9).
/// OBJ files with out-of-plane vertices describe surfaces, not solids, and
/// are rejected.
Mesh parse_obj_2d(std::istream& in);
Mesh load_obj_2d(const std::filesystem::path& path);

/// Tetrahedral mesh stored as a vertex file (x y z per row) and an element
/// file (4 zero-based indices per row).
Mesh parse_tet(std::istream& vertex_stream, std::istream& element_stream);
Mesh load_tet(const std::filesystem::path& vertex_file, const std::filesystem::path& element_file);

/// Dispatch on extension: `.obj` loads a 2D OBJ; `.verts` or `.tets` loads
/// the tet pair sharing the stem.
Mesh load_mesh(const std::filesystem::path& path);

void save_obj_2d(const Mesh& mesh, const std::filesystem::path& path);
void save_tet(const Mesh& mesh, const std::filesystem::path& vertex_file,
              const std::filesystem::path& element_file);

/// SHA-256 over a canonical binary encoding of dimension, vertices and
/// elements, as lowercase hex.
std::string mesh_hash(const Mesh& mesh);

}  // namespace fracture
