#include "dense_reference.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>

namespace oracle {

namespace {

double measure(const fracture::Mesh& mesh, int f) {
  const int d = mesh.dimension();
  Eigen::MatrixXd edges(d, d);
  for (int c = 1; c <= d; ++c) edges.col(c - 1) = (mesh.vertices.row(mesh.elements(f, c)) - mesh.vertices.row(mesh.elements(f, 0))).transpose();
  return std::abs(edges.determinant()) / (d == 2 ? 2.0 : 6.0);
}

}  // namespace

Eigen::VectorXd dense_element_mass(const fracture::Mesh& mesh, double density) {
  Eigen::VectorXd out(mesh.num_elements());
  for (int f = 0; f < mesh.num_elements(); ++f) out[f] = density * measure(mesh, f);
  return out;
}

Eigen::VectorXd dense_vertex_mass(const fracture::Mesh& mesh, double density) {
  const int d = mesh.dimension();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(mesh.num_vertices());
  for (int f = 0; f < mesh.num_elements(); ++f) {
    for (int c = 0; c <= d; ++c) out[mesh.elements(f, c)] += density * measure(mesh, f) / (d + 1);
  }
  return out;
}

Eigen::MatrixXd dense_laplacian(const fracture::Mesh& mesh) {
  const int n = mesh.num_vertices();
  const int d = mesh.dimension();
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
  for (int f = 0; f < mesh.num_elements(); ++f) {
    if (d == 2) {
      // Edge (i, j) opposite corner k gets cot(angle at k) / 2.
      for (int k = 0; k < 3; ++k) {
        const int i = mesh.elements(f, (k + 1) % 3), j = mesh.elements(f, (k + 2) % 3);
        const Eigen::Vector2d a = mesh.vertices.row(i) - mesh.vertices.row(mesh.elements(f, k));
        const Eigen::Vector2d b = mesh.vertices.row(j) - mesh.vertices.row(mesh.elements(f, k));
        const double cot = a.dot(b) / std::abs(a.x() * b.y() - a.y() * b.x());
        L(i, j) -= 0.5 * cot;
        L(j, i) -= 0.5 * cot;
        L(i, i) += 0.5 * cot;
        L(j, j) += 0.5 * cot;
      }
    } else {
      // Rows of the inverse of [1 x; 1 y; ...] are the barycentric gradients.
      Eigen::Matrix4d affine;
      for (int c = 0; c < 4; ++c) {
        affine(c, 0) = 1.0;
        affine.block<1, 3>(c, 1) = mesh.vertices.row(mesh.elements(f, c));
      }
      const Eigen::Matrix4d inverse = affine.inverse();
      const double volume = measure(mesh, f);
      for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) {
          const Eigen::Vector3d ga = inverse.block<3, 1>(1, a), gb = inverse.block<3, 1>(1, b);
          L(mesh.elements(f, a), mesh.elements(f, b)) += volume * ga.dot(gb);
        }
      }
    }
  }
  return L;
}

void dense_generalized_eigen(const Eigen::MatrixXd& stiffness, const Eigen::VectorXd& mass, Eigen::VectorXd& values,
                             Eigen::MatrixXd& vectors) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(stiffness, Eigen::MatrixXd(mass.asDiagonal()));
  values = solver.eigenvalues();
  vectors = solver.eigenvectors();
}

Eigen::MatrixXd dense_projected_impact(const fracture::Mesh& mesh, const std::vector<Eigen::MatrixXd>& fields,
                                       const std::vector<int>& piece_labels, int pieces, int vertex,
                                       const Eigen::VectorXd& normal, double tau, double magnitude) {
  const int d = mesh.dimension();
  const int m = mesh.num_elements();
  const Eigen::VectorXd vm = dense_vertex_mass(mesh);
  const Eigen::VectorXd em = dense_element_mass(mesh);
  const Eigen::MatrixXd system = Eigen::MatrixXd(vm.asDiagonal()) + tau * dense_laplacian(mesh);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(mesh.num_vertices());
  rhs[vertex] = vm[vertex] * magnitude;
  const Eigen::VectorXd g = system.ldlt().solve(rhs);

  Eigen::MatrixXd projected = Eigen::MatrixXd::Zero(m, d);
  for (const Eigen::MatrixXd& mode : fields) {
    double alpha = 0.0;
    for (int f = 0; f < m; ++f) {
      for (int c = 0; c <= d; ++c) alpha += em[f] / (d + 1) * g[mesh.elements(f, c)] * mode.row(f).dot(normal);
    }
    projected += alpha * mode;
  }
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(pieces, d);
  Eigen::VectorXd piece_mass = Eigen::VectorXd::Zero(pieces);
  for (int f = 0; f < m; ++f) {
    out.row(piece_labels[f]) += em[f] * projected.row(f);
    piece_mass[piece_labels[f]] += em[f];
  }
  for (int a = 0; a < pieces; ++a) out.row(a) /= piece_mass[a];
  return out;
}

double dense_jump_energy(const fracture::Mesh& mesh, const Eigen::MatrixXd& field, const Eigen::VectorXd& eta_axis) {
  const int d = mesh.dimension();
  std::map<std::array<int, 3>, std::vector<int>> faces;
  for (int f = 0; f < mesh.num_elements(); ++f) {
    for (int omit = 0; omit <= d; ++omit) {
      std::array<int, 3> key{-1, -1, -1};
      int j = 0;
      for (int c = 0; c <= d; ++c) {
        if (c != omit) key[j++] = mesh.elements(f, c);
      }
      std::sort(key.begin(), key.begin() + d);
      faces[key].push_back(f);
    }
  }
  double total = 0.0;
  for (const auto& [key, owners] : faces) {
    if (owners.size() != 2) continue;
    double area = 0.0;
    if (d == 2) {
      area = (mesh.vertices.row(key[0]) - mesh.vertices.row(key[1])).norm();
    } else {
      const Eigen::Vector3d a = mesh.vertices.row(key[1]) - mesh.vertices.row(key[0]);
      const Eigen::Vector3d b = mesh.vertices.row(key[2]) - mesh.vertices.row(key[0]);
      area = 0.5 * a.cross(b).norm();
    }
    const Eigen::VectorXd jump = field.row(owners[0]) - field.row(owners[1]);
    total += std::sqrt(area) * (eta_axis.array() * jump.array()).matrix().norm();
  }
  return total;
}

}  // namespace oracle
