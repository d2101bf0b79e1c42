#include "fracture/export.hpp"

#include "fracture/error.hpp"

#include <array>
#include <fstream>
#include <iomanip>
#include <ostream>

namespace fracture {

namespace {

// Local corner triples of the outward face opposite each corner of a
// positively oriented tetrahedron.
constexpr std::array<std::array<int, 3>, 4> kTetFaces{{{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}}};

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
  out << std::setprecision(17);
  return out;
}

struct GroupWriter {
  const ExplodedMesh& em;
  const std::vector<int>& labels;
  std::vector<std::array<bool, 4>> keep;
  std::vector<int> local;

  GroupWriter(const ExplodedMesh& mesh, const std::vector<int>& element_labels)
      : em(mesh), labels(element_labels), keep(mesh.num_elements(), {true, true, true, true}),
        local(mesh.base.num_vertices(), -1) {
    if (static_cast<int>(labels.size()) != em.num_elements()) {
      throw Error(ErrorCode::invalid_argument, "label count mismatch");
    }
    // 3D groups keep only faces not shared within the group.
    if (em.dimension() != 3) return;
    for (const InteriorFacet& facet : em.interior_facets) {
      const int f = facet.elements[0], g = facet.elements[1];
      if (labels[f] != labels[g]) continue;
      int omitted_f = 6, omitted_g = 6;
      for (int j = 0; j < 3; ++j) {
        omitted_f -= facet.corners[j][0] - 4 * f;
        omitted_g -= facet.corners[j][1] - 4 * g;
      }
      keep[f][omitted_f] = false;
      keep[g][omitted_g] = false;
    }
  }

  // Returns the number of vertices written; `base` is the running OBJ index.
  int write(std::ostream& out, const std::vector<int>& members, const std::string& name,
            const Eigen::VectorXd* offset, int base) {
    const Mesh& mesh = em.base;
    const int d = mesh.dimension();
    out << "o " << name << "\n";
    std::vector<int> order;
    for (int f : members) {
      for (int c = 0; c <= d; ++c) {
        const int v = mesh.elements(f, c);
        if (local[v] < 0) {
          local[v] = static_cast<int>(order.size());
          order.push_back(v);
        }
      }
    }
    for (int v : order) {
      Eigen::Vector3d x = Eigen::Vector3d::Zero();
      x.head(d) = mesh.vertices.row(v).transpose();
      if (offset) x.head(d) += *offset;
      out << "v " << x[0] << " " << x[1] << " " << x[2] << "\n";
    }
    for (int f : members) {
      if (d == 2) {
        out << "f " << base + local[mesh.elements(f, 0)] + 1 << " " << base + local[mesh.elements(f, 1)] + 1 << " "
            << base + local[mesh.elements(f, 2)] + 1 << "\n";
        continue;
      }
      for (int omitted = 0; omitted < 4; ++omitted) {
        if (!keep[f][omitted]) continue;
        out << "f";
        for (int c : kTetFaces[omitted]) out << " " << base + local[mesh.elements(f, c)] + 1;
        out << "\n";
      }
    }
    for (int v : order) local[v] = -1;
    return static_cast<int>(order.size());
  }
};

std::vector<std::vector<int>> group_members(const std::vector<int>& labels, int count) {
  std::vector<std::vector<int>> members(count);
  for (int f = 0; f < static_cast<int>(labels.size()); ++f) members.at(labels[f]).push_back(f);
  return members;
}

}  // namespace

void write_groups_obj(std::ostream& out, const ExplodedMesh& em, const std::vector<int>& labels, int count,
                      const std::string& prefix, const Field* offsets) {
  GroupWriter writer(em, labels);
  const auto members = group_members(labels, count);
  int base = 0;
  for (int group = 0; group < count; ++group) {
    const Eigen::VectorXd offset = offsets ? Eigen::VectorXd(offsets->row(group).transpose()) : Eigen::VectorXd();
    base += writer.write(out, members[group], prefix + "_" + std::to_string(group), offsets ? &offset : nullptr, base);
  }
}

void export_pattern(const std::filesystem::path& path, const Mesh& mesh, const FracturePattern& pattern,
                    bool apply_translations) {
  std::ofstream out = open_output(path);
  write_groups_obj(out, explode(mesh), pattern.labels, pattern.count, "fragment",
                   apply_translations ? &pattern.translations : nullptr);
  if (!out) throw Error(ErrorCode::io, "failed writing " + path.string());
}

std::vector<std::filesystem::path> export_pieces(const std::filesystem::path& path, const Mesh& mesh,
                                                 const BasePiecePartition& partition) {
  const ExplodedMesh em = explode(mesh);
  const std::string spelled = path.string();
  const bool directory = std::filesystem::is_directory(path) || (!spelled.empty() && spelled.back() == '/');
  if (!directory) {
    std::ofstream out = open_output(path);
    write_groups_obj(out, em, partition.labels, partition.count, "piece");
    if (!out) throw Error(ErrorCode::io, "failed writing " + spelled);
    return {path};
  }
  std::filesystem::create_directories(path);
  GroupWriter writer(em, partition.labels);
  const auto members = group_members(partition.labels, partition.count);
  std::vector<std::filesystem::path> written;
  for (int piece = 0; piece < partition.count; ++piece) {
    const std::string name = "piece_" + std::to_string(piece);
    const std::filesystem::path file = path / (name + ".obj");
    std::ofstream out = open_output(file);
    writer.write(out, members[piece], name, nullptr, 0);
    if (!out) throw Error(ErrorCode::io, "failed writing " + file.string());
    written.push_back(file);
  }
  return written;
}

}  // namespace fracture
