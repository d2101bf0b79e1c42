#pragma once

#include "fracture/mesh.hpp"
#include "fracture/modes.hpp"
#include "fracture/pattern.hpp"

#include <filesystem>
#include <string>

namespace fracture {

inline constexpr const char* kArtifactFormat = "fracture-modes/1";

/// Everything precompute produces for one mesh. Serialized as one JSON
/// document; see docs/artifact.md for the schema.
struct ModesArtifact {
  std::string mesh_hash;
  SolverConfig config;
  FractureModes modes;
  BasePiecePartition pieces;
};

/// Modes, base pieces and hash for `mesh`.
ModesArtifact make_artifact(const Mesh& mesh, const FractureModes& modes, const SolverConfig& config,
                            double activity_tolerance = 1e-8);

std::string artifact_to_json(const ModesArtifact& artifact);
ModesArtifact artifact_from_json(const std::string& text);

void save_artifact(const ModesArtifact& artifact, const std::filesystem::path& path);
ModesArtifact load_artifact(const std::filesystem::path& path);

/// Throws mesh_mismatch if the artifact was computed for a different mesh.
void check_artifact_mesh(const ModesArtifact& artifact, const Mesh& mesh);

}  // namespace fracture
