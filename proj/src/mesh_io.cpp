#include "fracture/mesh_io.hpp"

#include "fracture/error.hpp"

#include <openssl/evp.h>

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>
#include <vector>

namespace fracture {

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
  out << std::setprecision(17);
  return out;
}

int parse_obj_index(const std::string& token, int vertex_count, int line_no) {
  const std::string head = token.substr(0, token.find('/'));
  int idx = 0;
  try {
    std::size_t used = 0;
    idx = std::stoi(head, &used);
    if (used != head.size()) throw std::invalid_argument(head);
  } catch (const std::exception&) {
    throw Error(ErrorCode::parse, "line " + std::to_string(line_no) + ": bad face index '" + token + "'");
  }
  if (idx < 0) return vertex_count + idx;
  if (idx == 0) throw Error(ErrorCode::parse, "line " + std::to_string(line_no) + ": face index 0");
  return idx - 1;
}

void append_le(std::vector<unsigned char>& bytes, const void* data, std::size_t size) {
  static_assert(std::endian::native == std::endian::little, "hash encoding assumes little-endian host");
  const auto* p = static_cast<const unsigned char*>(data);
  bytes.insert(bytes.end(), p, p + size);
}

}  // namespace

Mesh parse_obj_2d(std::istream& in) {
  std::vector<std::array<double, 3>> positions;
  std::vector<std::array<int, 3>> faces;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      std::array<double, 3> p{0.0, 0.0, 0.0};
      if (!(ls >> p[0] >> p[1])) {
        throw Error(ErrorCode::parse, "line " + std::to_string(line_no) + ": malformed vertex");
      }
      ls >> p[2];
      positions.push_back(p);
    } else if (tag == "f") {
      std::vector<std::string> tokens;
      for (std::string t; ls >> t;) tokens.push_back(t);
      if (tokens.size() != 3) {
        throw Error(ErrorCode::non_simplicial,
                    "non-simplicial element at line " + std::to_string(line_no));
      }
      std::array<int, 3> face{};
      for (int j = 0; j < 3; ++j) {
        face[j] = parse_obj_index(tokens[j], static_cast<int>(positions.size()), line_no);
      }
      faces.push_back(face);
    }
  }
  for (const auto& p : positions) {
    if (std::abs(p[2]) > 1e-9) {
      throw Error(ErrorCode::invalid_mesh,
                  "OBJ has out-of-plane vertices: 3D surface meshes are not solids");
    }
  }
  Vertices vertices(positions.size(), 2);
  for (std::size_t i = 0; i < positions.size(); ++i) vertices.row(i) << positions[i][0], positions[i][1];
  Elements elements(faces.size(), 3);
  for (std::size_t i = 0; i < faces.size(); ++i) elements.row(i) << faces[i][0], faces[i][1], faces[i][2];
  return make_mesh(std::move(vertices), std::move(elements));
}

Mesh load_obj_2d(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_obj_2d(in);
}

Mesh parse_tet(std::istream& vertex_stream, std::istream& element_stream) {
  std::vector<double> coords;
  std::vector<int> indices;
  std::string line;
  int line_no = 0;
  while (std::getline(vertex_stream, line)) {
    ++line_no;
    std::istringstream ls(line);
    double x, y, z;
    if (!(ls >> x)) continue;
    if (!(ls >> y >> z)) {
      throw Error(ErrorCode::parse, "vertex file line " + std::to_string(line_no) + ": expected x y z");
    }
    coords.insert(coords.end(), {x, y, z});
  }
  line_no = 0;
  while (std::getline(element_stream, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::vector<long> row;
    std::string token;
    while (ls >> token) {
      try {
        std::size_t used = 0;
        row.push_back(std::stol(token, &used));
        if (used != token.size()) throw std::invalid_argument(token);
      } catch (const std::exception&) {
        throw Error(ErrorCode::parse, "element file line " + std::to_string(line_no) + ": bad index");
      }
    }
    if (row.empty()) continue;
    if (row.size() != 4) {
      throw Error(ErrorCode::non_simplicial,
                  "non-simplicial element at element file line " + std::to_string(line_no));
    }
    indices.insert(indices.end(), row.begin(), row.end());
  }
  Vertices vertices = Eigen::Map<Vertices>(coords.data(), static_cast<Eigen::Index>(coords.size() / 3), 3);
  Elements elements = Eigen::Map<Elements>(indices.data(), static_cast<Eigen::Index>(indices.size() / 4), 4);
  return make_mesh(std::move(vertices), std::move(elements));
}

Mesh load_tet(const std::filesystem::path& vertex_file, const std::filesystem::path& element_file) {
  auto vin = open_input(vertex_file);
  auto ein = open_input(element_file);
  return parse_tet(vin, ein);
}

Mesh load_mesh(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".obj") return load_obj_2d(path);
  if (ext == ".verts" || ext == ".tets") {
    auto stem = path;
    return load_tet(stem.replace_extension(".verts"), std::filesystem::path(path).replace_extension(".tets"));
  }
  throw Error(ErrorCode::invalid_argument,
              "unrecognized mesh extension '" + ext + "' (expected .obj, .verts or .tets)");
}

void save_obj_2d(const Mesh& mesh, const std::filesystem::path& path) {
  auto out = open_output(path);
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    out << "v " << mesh.vertices(v, 0) << ' ' << mesh.vertices(v, 1) << " 0\n";
  }
  for (int f = 0; f < mesh.num_elements(); ++f) {
    out << "f " << mesh.elements(f, 0) + 1 << ' ' << mesh.elements(f, 1) + 1 << ' '
        << mesh.elements(f, 2) + 1 << '\n';
  }
}

void save_tet(const Mesh& mesh, const std::filesystem::path& vertex_file,
              const std::filesystem::path& element_file) {
  auto vout = open_output(vertex_file);
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    vout << mesh.vertices(v, 0) << ' ' << mesh.vertices(v, 1) << ' ' << mesh.vertices(v, 2) << '\n';
  }
  auto eout = open_output(element_file);
  for (int f = 0; f < mesh.num_elements(); ++f) {
    eout << mesh.elements(f, 0) << ' ' << mesh.elements(f, 1) << ' ' << mesh.elements(f, 2) << ' '
         << mesh.elements(f, 3) << '\n';
  }
}

std::string mesh_hash(const Mesh& mesh) {
  std::vector<unsigned char> bytes;
  const char tag[] = "fracture-mesh/1";
  append_le(bytes, tag, sizeof(tag) - 1);
  const std::int32_t header[3] = {mesh.dimension(), mesh.num_vertices(), mesh.num_elements()};
  append_le(bytes, header, sizeof(header));
  append_le(bytes, mesh.vertices.data(), sizeof(double) * mesh.vertices.size());
  for (Eigen::Index i = 0; i < mesh.elements.size(); ++i) {
    const std::int32_t idx = mesh.elements.data()[i];
    append_le(bytes, &idx, sizeof(idx));
  }

  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &length) != 1) {
    throw Error(ErrorCode::io, "sha256 failed");
  }
  std::ostringstream hex;
  for (unsigned int i = 0; i < length; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return hex.str();
}

}  // namespace fracture
