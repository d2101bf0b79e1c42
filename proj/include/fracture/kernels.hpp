#pragma once

#include "fracture/mesh.hpp"
#include "fracture/operators.hpp"

#include <span>
#include <vector>

namespace fracture::kernels {

/// Weighted facet-jump operator y_e = W_e (.) (v_f - v_g) on flattened
/// element fields (index f * d + c) and facet fields (index e * d + c).
struct JumpOperator {
  int dimension = 0;
  int elements = 0;
  int facets = 0;
  std::vector<std::array<int, 2>> pairs;
  std::vector<double> weights;  // p * d
  std::vector<int> offsets;     // element -> incident facets (CSR)
  std::vector<int> ids;
  std::vector<int> sides;
};

/// W_e = scale * sqrt(a_e) * eta_e.
JumpOperator make_jump_operator(const ExplodedMesh& em, const FacetWeights& eta, double scale);

// Reference implementations. The OpenMP versions below compute
// bit-identical results: every output entry is written by exactly one
// iteration and no floating reduction crosses threads.
namespace serial {
void apply(const JumpOperator& op, std::span<const double> v, std::span<double> y);
void apply_transpose(const JumpOperator& op, std::span<const double> y, std::span<double> v);
void block_shrink(std::span<const double> x, int dimension, double threshold, std::span<double> y);
void group_norms(std::span<const double> x, int dimension, std::span<double> norms);
void combine_rows(std::span<const double> coefficients, std::span<const double> rows, std::span<double> out);
}  // namespace serial

namespace parallel {
void apply(const JumpOperator& op, std::span<const double> v, std::span<double> y);
void apply_transpose(const JumpOperator& op, std::span<const double> y, std::span<double> v);
void block_shrink(std::span<const double> x, int dimension, double threshold, std::span<double> y);
void group_norms(std::span<const double> x, int dimension, std::span<double> norms);
void combine_rows(std::span<const double> coefficients, std::span<const double> rows, std::span<double> out);
}  // namespace parallel

/// Ordered (thread-count independent) sum.
double ordered_sum(std::span<const double> values);

}  // namespace fracture::kernels
