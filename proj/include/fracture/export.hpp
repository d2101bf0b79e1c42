#pragma once

#include "fracture/impact.hpp"
#include "fracture/mesh.hpp"
#include "fracture/pattern.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace fracture {

/// Writes one OBJ object per label group, named `<prefix>_<index>`. 2D groups
/// are triangle sets at z = 0; 3D groups are their outward-oriented boundary
/// triangles. Row j of `offsets`, when given, translates group j.
void write_groups_obj(std::ostream& out, const ExplodedMesh& em, const std::vector<int>& labels, int count,
                      const std::string& prefix, const Field* offsets = nullptr);

/// Fracture pattern as a multi-object OBJ; translations applied or zeroed.
void export_pattern(const std::filesystem::path& path, const Mesh& mesh, const FracturePattern& pattern,
                    bool apply_translations);

/// Prefractured pieces: a multi-object OBJ, or one `piece_<i>.obj` per piece
/// when `path` is a directory (existing, or spelled with a trailing slash).
/// Returns the files written.
std::vector<std::filesystem::path> export_pieces(const std::filesystem::path& path, const Mesh& mesh,
                                                 const BasePiecePartition& partition);

}  // namespace fracture
