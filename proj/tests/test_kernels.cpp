#include "fracture/generators.hpp"
#include "fracture/kernels.hpp"
#include "fracture/operators.hpp"

#include <gtest/gtest.h>
#include <omp.h>

#include <cstring>
#include <random>

using namespace fracture;

namespace {

std::vector<double> random_vector(std::size_t n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  std::vector<double> v(n);
  for (double& x : v) x = g(rng);
  return v;
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

class KernelTest : public ::testing::TestWithParam<int> {
 protected:
  void SetUp() override {
    saved_ = omp_get_max_threads();
    omp_set_num_threads(GetParam());
  }
  void TearDown() override { omp_set_num_threads(saved_); }

 private:
  int saved_ = 1;
};

std::vector<ExplodedMesh> meshes() {
  return {explode(generators::hourglass(12, 6)), explode(generators::box_tets(4, 3, 2, 2.0, 1.0, 1.0))};
}

}  // namespace

TEST_P(KernelTest, JumpApplyMatchesSerialBitwise) {
  for (const ExplodedMesh& em : meshes()) {
    const int d = em.dimension();
    Eigen::VectorXd axis = Eigen::VectorXd::LinSpaced(d, 1.0, 3.0);
    const auto op = kernels::make_jump_operator(em, uniform_eta(em, axis), 1.7);
    const auto v = random_vector(static_cast<std::size_t>(em.num_elements()) * d, 1);
    std::vector<double> ys(em.num_facets() * d), yp(ys.size());
    kernels::serial::apply(op, v, ys);
    kernels::parallel::apply(op, v, yp);
    EXPECT_TRUE(bitwise_equal(ys, yp));

    const auto y = random_vector(ys.size(), 2);
    std::vector<double> vs(v.size()), vp(v.size());
    kernels::serial::apply_transpose(op, y, vs);
    kernels::parallel::apply_transpose(op, y, vp);
    EXPECT_TRUE(bitwise_equal(vs, vp));
  }
}

TEST_P(KernelTest, ShrinkNormsAndCombineMatchSerialBitwise) {
  const int d = 3;
  const auto x = random_vector(3000 * d, 3);
  std::vector<double> ys(x.size()), yp(x.size());
  kernels::serial::block_shrink(x, d, 0.8, ys);
  kernels::parallel::block_shrink(x, d, 0.8, yp);
  EXPECT_TRUE(bitwise_equal(ys, yp));

  std::vector<double> ns(3000), np(3000);
  kernels::serial::group_norms(x, d, ns);
  kernels::parallel::group_norms(x, d, np);
  EXPECT_TRUE(bitwise_equal(ns, np));

  const auto coefficients = random_vector(30, 4);
  const auto rows = random_vector(30 * 777, 5);
  std::vector<double> cs(777), cp(777);
  kernels::serial::combine_rows(coefficients, rows, cs);
  kernels::parallel::combine_rows(coefficients, rows, cp);
  EXPECT_TRUE(bitwise_equal(cs, cp));
}

INSTANTIATE_TEST_SUITE_P(Threads, KernelTest, ::testing::Values(1, 2, 4));

TEST(Kernels, JumpOperatorMatchesElementDiscontinuity) {
  for (const ExplodedMesh& em : meshes()) {
    const int d = em.dimension();
    Eigen::VectorXd axis = Eigen::VectorXd::LinSpaced(d, 0.5, 2.0);
    const FacetWeights eta = uniform_eta(em, axis);
    const DiscontinuityOperator dop = assemble_discontinuity(em, eta);
    const auto op = kernels::make_jump_operator(em, eta, 1.0);
    const auto v = random_vector(static_cast<std::size_t>(em.num_elements()) * d, 6);
    std::vector<double> y(em.num_facets() * d);
    kernels::serial::apply(op, v, y);
    const Eigen::VectorXd expected = dop.element * Eigen::Map<const Eigen::VectorXd>(v.data(), v.size());
    for (std::size_t i = 0; i < y.size(); ++i) EXPECT_NEAR(y[i], expected[i], 1e-13);
  }
}

TEST(Kernels, TransposeIsAdjoint) {
  const ExplodedMesh em = explode(generators::notched_block(2, 2));
  const auto op = kernels::make_jump_operator(em, unit_eta(em), 2.0);
  const auto v = random_vector(em.num_elements() * 2, 7);
  const auto y = random_vector(em.num_facets() * 2, 8);
  std::vector<double> dv(y.size()), dty(v.size());
  kernels::parallel::apply(op, v, dv);
  kernels::parallel::apply_transpose(op, y, dty);
  double lhs = 0.0, rhs = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) lhs += dv[i] * y[i];
  for (std::size_t i = 0; i < v.size(); ++i) rhs += v[i] * dty[i];
  EXPECT_NEAR(lhs, rhs, 1e-12 * (1.0 + std::abs(lhs)));
}

TEST(Kernels, BlockShrinkIsGroupProximalOperator) {
  std::vector<double> x{3.0, 4.0, 0.1, 0.1}, y(4);
  kernels::serial::block_shrink(x, 2, 1.0, y);
  EXPECT_DOUBLE_EQ(y[0], 3.0 * 0.8);
  EXPECT_DOUBLE_EQ(y[1], 4.0 * 0.8);
  EXPECT_EQ(y[2], 0.0);
  EXPECT_EQ(y[3], 0.0);
}

TEST(Kernels, OrderedSumIsSequential) {
  std::vector<double> v{1e16, 1.0, -1e16, 1.0};
  double expected = 0.0;
  for (double x : v) expected += x;
  EXPECT_EQ(kernels::ordered_sum(v), expected);
}
