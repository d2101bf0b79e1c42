#pragma once

#include "fracture/operators.hpp"

#include <Eigen/Core>

namespace fracture {

struct EigenPairs {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // n x count, M-orthonormal columns
  int iterations = 0;
};

struct EigenOptions {
  double tolerance = 1e-10;  // relative residual |Lx - lambda Mx|
  int max_iterations = 2000;
  int dense_threshold = 600;  // use a dense solve at or below this size
};

/// Smallest `count` eigenpairs of L x = lambda M x with L symmetric PSD and M
/// a positive diagonal. Each vector's largest-magnitude entry is positive.
EigenPairs smallest_eigenpairs(const SparseMatrix& stiffness, const Eigen::VectorXd& mass_diagonal,
                               int count, const EigenOptions& options = {});

}  // namespace fracture
