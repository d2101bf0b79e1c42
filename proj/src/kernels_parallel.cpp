#include "fracture/kernels.hpp"

#include <cmath>
#include <cstddef>

namespace fracture::kernels::parallel {

void apply(const JumpOperator& op, std::span<const double> v, std::span<double> y) {
  const int d = op.dimension;
#pragma omp parallel for schedule(static)
  for (int e = 0; e < op.facets; ++e) {
    const int f = op.pairs[e][0], g = op.pairs[e][1];
    for (int c = 0; c < d; ++c) {
      y[e * d + c] = op.weights[e * d + c] * (v[f * d + c] - v[g * d + c]);
    }
  }
}

void apply_transpose(const JumpOperator& op, std::span<const double> y, std::span<double> v) {
  const int d = op.dimension;
#pragma omp parallel for schedule(static)
  for (int f = 0; f < op.elements; ++f) {
    for (int c = 0; c < d; ++c) v[f * d + c] = 0.0;
    for (int k = op.offsets[f]; k < op.offsets[f + 1]; ++k) {
      const int e = op.ids[k];
      const double sign = op.sides[k] == 0 ? 1.0 : -1.0;
      for (int c = 0; c < d; ++c) v[f * d + c] += sign * op.weights[e * d + c] * y[e * d + c];
    }
  }
}

void block_shrink(std::span<const double> x, int dimension, double threshold, std::span<double> y) {
  const auto groups = static_cast<std::ptrdiff_t>(x.size() / dimension);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t e = 0; e < groups; ++e) {
    double norm2 = 0.0;
    for (int c = 0; c < dimension; ++c) norm2 += x[e * dimension + c] * x[e * dimension + c];
    const double norm = std::sqrt(norm2);
    const double factor = norm > threshold ? 1.0 - threshold / norm : 0.0;
    for (int c = 0; c < dimension; ++c) y[e * dimension + c] = factor * x[e * dimension + c];
  }
}

void group_norms(std::span<const double> x, int dimension, std::span<double> norms) {
  const auto groups = static_cast<std::ptrdiff_t>(x.size() / dimension);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t e = 0; e < groups; ++e) {
    double norm2 = 0.0;
    for (int c = 0; c < dimension; ++c) norm2 += x[e * dimension + c] * x[e * dimension + c];
    norms[e] = std::sqrt(norm2);
  }
}

void combine_rows(std::span<const double> coefficients, std::span<const double> rows, std::span<double> out) {
  const auto width = static_cast<std::ptrdiff_t>(out.size());
  const std::size_t k = coefficients.size();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < width; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < k; ++i) acc += coefficients[i] * rows[i * width + j];
    out[j] = acc;
  }
}

}  // namespace fracture::kernels::parallel
