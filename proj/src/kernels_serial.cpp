#include "fracture/kernels.hpp"

#include <cmath>

namespace fracture::kernels {

JumpOperator make_jump_operator(const ExplodedMesh& em, const FacetWeights& eta, double scale) {
  JumpOperator op;
  op.dimension = em.dimension();
  op.elements = em.num_elements();
  op.facets = em.num_facets();
  op.pairs.resize(op.facets);
  op.weights.resize(static_cast<std::size_t>(op.facets) * op.dimension);
  for (int e = 0; e < op.facets; ++e) {
    const auto& facet = em.interior_facets[e];
    op.pairs[e] = facet.elements;
    const double w = scale * std::sqrt(facet.measure);
    for (int c = 0; c < op.dimension; ++c) op.weights[e * op.dimension + c] = w * eta(e, c);
  }
  op.offsets = em.element_facet_offsets;
  op.ids = em.element_facet_ids;
  op.sides = em.element_facet_sides;
  return op;
}

double ordered_sum(std::span<const double> values) {
  double total = 0.0;
  for (double v : values) total += v;
  return total;
}

namespace serial {

void apply(const JumpOperator& op, std::span<const double> v, std::span<double> y) {
  const int d = op.dimension;
  for (int e = 0; e < op.facets; ++e) {
    const int f = op.pairs[e][0], g = op.pairs[e][1];
    for (int c = 0; c < d; ++c) {
      y[e * d + c] = op.weights[e * d + c] * (v[f * d + c] - v[g * d + c]);
    }
  }
}

void apply_transpose(const JumpOperator& op, std::span<const double> y, std::span<double> v) {
  const int d = op.dimension;
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
  const std::size_t groups = x.size() / dimension;
  for (std::size_t e = 0; e < groups; ++e) {
    double norm2 = 0.0;
    for (int c = 0; c < dimension; ++c) norm2 += x[e * dimension + c] * x[e * dimension + c];
    const double norm = std::sqrt(norm2);
    const double factor = norm > threshold ? 1.0 - threshold / norm : 0.0;
    for (int c = 0; c < dimension; ++c) y[e * dimension + c] = factor * x[e * dimension + c];
  }
}

void group_norms(std::span<const double> x, int dimension, std::span<double> norms) {
  const std::size_t groups = x.size() / dimension;
  for (std::size_t e = 0; e < groups; ++e) {
    double norm2 = 0.0;
    for (int c = 0; c < dimension; ++c) norm2 += x[e * dimension + c] * x[e * dimension + c];
    norms[e] = std::sqrt(norm2);
  }
}

void combine_rows(std::span<const double> coefficients, std::span<const double> rows, std::span<double> out) {
  const std::size_t width = out.size();
  for (std::size_t j = 0; j < width; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < coefficients.size(); ++i) acc += coefficients[i] * rows[i * width + j];
    out[j] = acc;
  }
}

}  // namespace serial
}  // namespace fracture::kernels
