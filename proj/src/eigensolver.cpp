#include "fracture/eigensolver.hpp"

#include "fracture/error.hpp"
#include "fracture/log.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <random>

namespace fracture {

namespace {

void normalize_signs(Eigen::MatrixXd& vectors) {
  for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
    Eigen::Index at = 0;
    vectors.col(j).cwiseAbs().maxCoeff(&at);
    if (vectors(at, j) < 0) vectors.col(j) *= -1.0;
  }
}

EigenPairs dense_eigenpairs(const SparseMatrix& stiffness, const Eigen::VectorXd& mass, int count) {
  const Eigen::VectorXd inv_sqrt = mass.cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd scaled = inv_sqrt.asDiagonal() * Eigen::MatrixXd(stiffness) * inv_sqrt.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(scaled);
  if (eig.info() != Eigen::Success) throw Error(ErrorCode::not_converged, "dense eigensolver failed");
  EigenPairs out;
  out.values = eig.eigenvalues().head(count);
  out.vectors = inv_sqrt.asDiagonal() * eig.eigenvectors().leftCols(count);
  return out;
}

// Orthonormal basis of span(Y) in the M inner product.
Eigen::MatrixXd m_orthonormal_basis(const Eigen::MatrixXd& block, const Eigen::VectorXd& mass) {
  const Eigen::MatrixXd gram = block.transpose() * mass.asDiagonal() * block;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  const double cutoff = 1e-13 * eig.eigenvalues().cwiseAbs().maxCoeff();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index j = 0; j < gram.cols(); ++j) {
    if (eig.eigenvalues()[j] > cutoff) keep.push_back(j);
  }
  Eigen::MatrixXd basis(block.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) {
    basis.col(j) = block * eig.eigenvectors().col(keep[j]) / std::sqrt(eig.eigenvalues()[keep[j]]);
  }
  return basis;
}

}  // namespace

EigenPairs smallest_eigenpairs(const SparseMatrix& stiffness, const Eigen::VectorXd& mass, int count,
                               const EigenOptions& options) {
  const auto n = stiffness.rows();
  if (count < 0 || count > n) {
    throw Error(ErrorCode::out_of_range, "requested more eigenpairs than unknowns");
  }
  EigenPairs out;
  if (count == 0) {
    out.values.resize(0);
    out.vectors.resize(n, 0);
    return out;
  }
  if (n <= options.dense_threshold) {
    out = dense_eigenpairs(stiffness, mass, count);
    normalize_signs(out.vectors);
    return out;
  }

  // Shift-invert subspace iteration with Rayleigh-Ritz on a padded block.
  const double shift = 1e-3 * stiffness.diagonal().sum() / mass.sum();
  SparseMatrix shifted = stiffness;
  for (Eigen::Index i = 0; i < n; ++i) shifted.coeffRef(i, i) += shift * mass[i];
  Eigen::SimplicialLDLT<SparseMatrix> factor(shifted);
  if (factor.info() != Eigen::Success) {
    throw Error(ErrorCode::not_converged, "shift-invert factorization failed");
  }

  const Eigen::Index block = std::min<Eigen::Index>(n, count + std::max(8, count / 2));
  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  Eigen::MatrixXd basis(n, block);
  for (Eigen::Index j = 0; j < block; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) basis(i, j) = uniform(rng);
  }
  basis.col(0).setOnes();

  // Residuals are measured against operator scale so the constant vector
  // (Lx ~ 0) can converge.
  double operator_norm = 0.0;
  for (Eigen::Index col = 0; col < n; ++col) {
    double sum = 0.0;
    for (SparseMatrix::InnerIterator it(stiffness, col); it; ++it) sum += std::abs(it.value());
    operator_norm = std::max(operator_norm, sum);
  }
  const double mass_norm = mass.maxCoeff();

  Eigen::VectorXd ritz_values;
  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    const Eigen::MatrixXd image = factor.solve(mass.asDiagonal() * basis);
    const Eigen::MatrixXd q = m_orthonormal_basis(image, mass);
    const Eigen::MatrixXd projected = q.transpose() * (stiffness * q);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (projected + projected.transpose()));
    basis = q * eig.eigenvectors();
    ritz_values = eig.eigenvalues();
    if (basis.cols() < count) {
      throw Error(ErrorCode::not_converged, "subspace iteration lost rank");
    }

    const Eigen::MatrixXd lx = stiffness * basis.leftCols(count);
    const Eigen::MatrixXd mx = mass.asDiagonal() * basis.leftCols(count);
    double worst = 0.0;
    for (int j = 0; j < count; ++j) {
      const double scale = (operator_norm + std::abs(ritz_values[j]) * mass_norm) * basis.col(j).norm();
      worst = std::max(worst, (lx.col(j) - ritz_values[j] * mx.col(j)).norm() / scale);
    }
    if (worst <= options.tolerance || iter == options.max_iterations) {
      if (worst > options.tolerance) {
        logger().warn("subspace iteration stopped at residual {:.3g}", worst);
      }
      out.values = ritz_values.head(count);
      out.vectors = basis.leftCols(count);
      out.iterations = iter;
      break;
    }
  }
  normalize_signs(out.vectors);
  return out;
}

}  // namespace fracture
