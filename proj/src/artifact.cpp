#include "fracture/artifact.hpp"

#include "fracture/error.hpp"
#include "fracture/mesh_io.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace fracture {

using nlohmann::json;

namespace {

template <typename T>
std::vector<T> read_array(const json& doc, const char* key, std::size_t expected) {
  if (!doc.contains(key) || !doc.at(key).is_array()) {
    throw Error(ErrorCode::parse, std::string("artifact is missing array '") + key + "'");
  }
  auto values = doc.at(key).get<std::vector<T>>();
  if (values.size() != expected) {
    throw Error(ErrorCode::parse, std::string("artifact array '") + key + "' has " + std::to_string(values.size()) +
                                      " entries, expected " + std::to_string(expected));
  }
  return values;
}

}  // namespace

ModesArtifact make_artifact(const Mesh& mesh, const FractureModes& modes, const SolverConfig& config,
                            double activity_tolerance) {
  ModesArtifact artifact;
  artifact.mesh_hash = mesh_hash(mesh);
  artifact.config = config;
  artifact.modes = modes;
  artifact.pieces = base_pieces(explode(mesh), modes, activity_tolerance);
  return artifact;
}

std::string artifact_to_json(const ModesArtifact& artifact) {
  const FractureModes& modes = artifact.modes;
  const int k = modes.k();
  const std::size_t m = modes.elements, p = modes.facets, d = modes.dimension;

  std::vector<double> fields;
  fields.reserve(k * m * d);
  std::vector<double> jumps;
  jumps.reserve(k * p);
  std::vector<int> inner, conic;
  for (int i = 0; i < k; ++i) {
    fields.insert(fields.end(), modes.fields[i].data(), modes.fields[i].data() + modes.fields[i].size());
    jumps.insert(jumps.end(), modes.facet_jumps[i].data(), modes.facet_jumps[i].data() + modes.facet_jumps[i].size());
    inner.push_back(modes.stats[i].inner_iterations);
    conic.push_back(modes.stats[i].conic_iterations);
  }
  const SolverConfig& cfg = artifact.config;
  json doc = {
      {"format", kArtifactFormat},
      {"mesh_hash", artifact.mesh_hash},
      {"dimension", modes.dimension},
      {"num_elements", modes.elements},
      {"num_facets", modes.facets},
      {"num_modes", k},
      {"config",
       {{"k", cfg.k},
        {"epsilon", cfg.epsilon},
        {"omega", cfg.omega},
        {"max_inner_iters", cfg.max_inner_iters},
        {"conic_tolerance", cfg.conic_tolerance},
        {"density", cfg.density}}},
      {"element_masses", modes.element_masses},
      {"energies", modes.energies},
      {"objectives", modes.objectives},
      {"inner_iterations", inner},
      {"conic_iterations", conic},
      {"eta", std::vector<double>(modes.eta.data(), modes.eta.data() + modes.eta.size())},
      {"fields", fields},
      {"facet_jumps", jumps},
      {"base_pieces",
       {{"tolerance", artifact.pieces.tolerance},
        {"count", artifact.pieces.count},
        {"labels", artifact.pieces.labels},
        {"cut_facets", artifact.pieces.cut_facets}}},
  };
  return doc.dump() + "\n";
}

ModesArtifact artifact_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse, std::string("artifact is not valid JSON: ") + e.what());
  }
  try {
    if (doc.value("format", std::string()) != kArtifactFormat) {
      throw Error(ErrorCode::parse, "unsupported artifact format tag");
    }
    ModesArtifact artifact;
    artifact.mesh_hash = doc.at("mesh_hash").get<std::string>();
    FractureModes& modes = artifact.modes;
    modes.dimension = doc.at("dimension").get<int>();
    modes.elements = doc.at("num_elements").get<int>();
    modes.facets = doc.at("num_facets").get<int>();
    const int k = doc.at("num_modes").get<int>();
    if (modes.dimension < 2 || modes.dimension > 3 || modes.elements < 1 || modes.facets < 0 || k < 0) {
      throw Error(ErrorCode::parse, "artifact header is inconsistent");
    }
    const std::size_t m = modes.elements, p = modes.facets, d = modes.dimension;

    const json& cfg = doc.at("config");
    artifact.config.k = cfg.at("k").get<int>();
    artifact.config.epsilon = cfg.at("epsilon").get<double>();
    artifact.config.omega = cfg.at("omega").get<double>();
    artifact.config.max_inner_iters = cfg.at("max_inner_iters").get<int>();
    artifact.config.conic_tolerance = cfg.at("conic_tolerance").get<double>();
    artifact.config.density = cfg.at("density").get<double>();

    modes.element_masses = read_array<double>(doc, "element_masses", m);
    modes.energies = read_array<double>(doc, "energies", k);
    modes.objectives = read_array<double>(doc, "objectives", k);
    const auto inner = read_array<int>(doc, "inner_iterations", k);
    const auto conic = read_array<int>(doc, "conic_iterations", k);
    const auto eta = read_array<double>(doc, "eta", p * d);
    const auto fields = read_array<double>(doc, "fields", k * m * d);
    const auto jumps = read_array<double>(doc, "facet_jumps", k * p);

    modes.eta = Eigen::Map<const FacetWeights>(eta.data(), p, d);
    for (int i = 0; i < k; ++i) {
      modes.fields.push_back(Eigen::Map<const Field>(fields.data() + i * m * d, m, d));
      modes.facet_jumps.push_back(Eigen::Map<const Eigen::VectorXd>(jumps.data() + i * p, p));
      ModeStats stats;
      stats.inner_iterations = inner[i];
      stats.conic_iterations = conic[i];
      modes.stats.push_back(stats);
    }

    const json& pieces = doc.at("base_pieces");
    artifact.pieces.tolerance = pieces.at("tolerance").get<double>();
    artifact.pieces.count = pieces.at("count").get<int>();
    artifact.pieces.labels = read_array<int>(pieces, "labels", m);
    artifact.pieces.cut_facets = pieces.at("cut_facets").get<std::vector<int>>();
    for (int label : artifact.pieces.labels) {
      if (label < 0 || label >= artifact.pieces.count) throw Error(ErrorCode::parse, "piece label out of range");
    }
    for (int e : artifact.pieces.cut_facets) {
      if (e < 0 || e >= modes.facets) throw Error(ErrorCode::parse, "cut facet out of range");
    }
    return artifact;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse, std::string("malformed artifact: ") + e.what());
  }
}

void save_artifact(const ModesArtifact& artifact, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
  out << artifact_to_json(artifact);
  if (!out) throw Error(ErrorCode::io, "failed writing " + path.string());
}

ModesArtifact load_artifact(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return artifact_from_json(buffer.str());
}

void check_artifact_mesh(const ModesArtifact& artifact, const Mesh& mesh) {
  const std::string hash = mesh_hash(mesh);
  if (hash != artifact.mesh_hash) {
    throw Error(ErrorCode::mesh_mismatch,
                "artifact was computed for mesh " + artifact.mesh_hash.substr(0, 12) + ", not " + hash.substr(0, 12));
  }
}

}  // namespace fracture
