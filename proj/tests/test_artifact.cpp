#include "fracture/artifact.hpp"
#include "fracture/error.hpp"
#include "fracture/generators.hpp"
#include "fracture/mesh_io.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <filesystem>

namespace fs = std::filesystem;
using namespace fracture;
using nlohmann::json;

namespace {

ModesArtifact pinch_artifact() {
  const Mesh mesh = generators::pinch();
  SolverConfig config;
  config.k = 4;
  return make_artifact(mesh, compute_modes(mesh, config), config);
}

ErrorCode parse_code(const std::string& text) {
  try {
    artifact_from_json(text);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::io;
}

}  // namespace

TEST(Artifact, JsonRoundTripIsExact) {
  const ModesArtifact a = pinch_artifact();
  const std::string text = artifact_to_json(a);
  const ModesArtifact b = artifact_from_json(text);
  EXPECT_EQ(artifact_to_json(b), text);
  EXPECT_EQ(b.mesh_hash, a.mesh_hash);
  ASSERT_EQ(b.modes.k(), a.modes.k());
  for (int i = 0; i < a.modes.k(); ++i) {
    EXPECT_EQ(b.modes.fields[i], a.modes.fields[i]);
    EXPECT_EQ(b.modes.energies[i], a.modes.energies[i]);
    EXPECT_EQ(b.modes.facet_jumps[i], a.modes.facet_jumps[i]);
  }
  EXPECT_EQ(b.modes.eta, a.modes.eta);
  EXPECT_EQ(b.pieces.labels, a.pieces.labels);
  EXPECT_EQ(b.pieces.cut_facets, a.pieces.cut_facets);
  EXPECT_EQ(b.config.k, 4);
}

TEST(Artifact, DocumentLayout) {
  const ModesArtifact a = pinch_artifact();
  const json doc = json::parse(artifact_to_json(a));
  EXPECT_EQ(doc.at("format"), kArtifactFormat);
  EXPECT_EQ(doc.at("dimension"), 2);
  EXPECT_EQ(doc.at("num_elements"), 6);
  EXPECT_EQ(doc.at("num_facets"), 6);
  EXPECT_EQ(doc.at("num_modes"), 4);
  EXPECT_EQ(doc.at("fields").size(), 4u * 6 * 2);
  EXPECT_EQ(doc.at("facet_jumps").size(), 4u * 6);
  EXPECT_EQ(doc.at("eta").size(), 6u * 2);
  EXPECT_EQ(doc.at("element_masses").size(), 6u);
  // fields are mode-major, then element, then axis.
  EXPECT_EQ(doc.at("fields")[1 * 12 + 5 * 2 + 1].get<double>(), a.modes.fields[1](5, 1));
  EXPECT_EQ(doc.at("base_pieces").at("count"), a.pieces.count);
  EXPECT_EQ(doc.at("mesh_hash"), mesh_hash(generators::pinch()));
}

TEST(Artifact, SaveLoadAndMeshCheck) {
  const fs::path path = fs::temp_directory_path() / "fracture_artifact_test.modes";
  const ModesArtifact a = pinch_artifact();
  save_artifact(a, path);
  const ModesArtifact b = load_artifact(path);
  EXPECT_EQ(artifact_to_json(b), artifact_to_json(a));
  EXPECT_NO_THROW(check_artifact_mesh(b, generators::pinch()));
  try {
    check_artifact_mesh(b, generators::unit_square());
    FAIL() << "expected mesh mismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::mesh_mismatch);
  }
  EXPECT_THROW(load_artifact(path.string() + ".missing"), Error);
}

TEST(Artifact, RejectsMalformedDocuments) {
  const json good = json::parse(artifact_to_json(pinch_artifact()));
  EXPECT_EQ(parse_code("{ not json"), ErrorCode::parse);

  json wrong_tag = good;
  wrong_tag["format"] = "fracture-modes/0";
  EXPECT_EQ(parse_code(wrong_tag.dump()), ErrorCode::parse);

  json short_fields = good;
  short_fields["fields"].erase(short_fields["fields"].begin());
  EXPECT_EQ(parse_code(short_fields.dump()), ErrorCode::parse);

  json missing = good;
  missing.erase("energies");
  EXPECT_EQ(parse_code(missing.dump()), ErrorCode::parse);

  json bad_labels = good;
  bad_labels["base_pieces"]["labels"][0] = 99;
  EXPECT_EQ(parse_code(bad_labels.dump()), ErrorCode::parse);

  json inconsistent = good;
  inconsistent["num_modes"] = 5;
  EXPECT_EQ(parse_code(inconsistent.dump()), ErrorCode::parse);
}

TEST(Artifact, PrecomputeIsByteDeterministic) {
  const Mesh mesh = generators::notched_block(2, 2);
  SolverConfig config;
  config.k = 6;
  const std::string a = artifact_to_json(make_artifact(mesh, compute_modes(mesh, config), config));
  const std::string b = artifact_to_json(make_artifact(mesh, compute_modes(mesh, config), config));
  EXPECT_EQ(a, b);
}
