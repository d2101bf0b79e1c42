// Serial reference kernels against their OpenMP versions on the 12k-tet bar,
// plus the runtime impact path on synthetic modes.

#include "fracture/generators.hpp"
#include "fracture/impact.hpp"
#include "fracture/kernels.hpp"
#include "fracture/operators.hpp"
#include "fracture/pattern.hpp"

#include <benchmark/benchmark.h>
#include <omp.h>

#include <random>

using namespace fracture;

namespace {

struct BarData {
  ExplodedMesh em;
  kernels::JumpOperator op;
  std::vector<double> element_field;
  std::vector<double> facet_field;
  std::vector<double> rows;  // 30 element fields, row-major
  std::vector<double> coefficients;

  BarData() : em(explode(generators::bar_12k())) {
    op = kernels::make_jump_operator(em, unit_eta(em), std::sqrt(3.0));
    std::mt19937 rng(3);
    std::normal_distribution<double> normal;
    element_field.resize(static_cast<std::size_t>(em.num_elements()) * 3);
    facet_field.resize(static_cast<std::size_t>(em.num_facets()) * 3);
    rows.resize(30 * element_field.size());
    coefficients.resize(30);
    for (double& x : element_field) x = normal(rng);
    for (double& x : facet_field) x = normal(rng) * (normal(rng) > 1.0);
    for (double& x : rows) x = normal(rng);
    for (double& x : coefficients) x = normal(rng);
  }
};

const BarData& bar() {
  static const BarData data;
  return data;
}

// Arg: 0 for the serial kernel, otherwise the OpenMP thread count.
template <typename Serial, typename Parallel>
void run_kernel(benchmark::State& state, Serial serial, Parallel parallel) {
  const int threads = static_cast<int>(state.range(0));
  if (threads > 0) omp_set_num_threads(threads);
  for (auto _ : state) {
    if (threads == 0) {
      serial();
    } else {
      parallel();
    }
    benchmark::ClobberMemory();
  }
  state.SetLabel(threads == 0 ? "serial" : "omp x" + std::to_string(threads));
}

void BM_JumpApply(benchmark::State& state) {
  const BarData& b = bar();
  std::vector<double> y(b.facet_field.size());
  run_kernel(
      state, [&] { kernels::serial::apply(b.op, b.element_field, y); },
      [&] { kernels::parallel::apply(b.op, b.element_field, y); });
  state.SetItemsProcessed(state.iterations() * b.op.facets);
}

void BM_JumpTranspose(benchmark::State& state) {
  const BarData& b = bar();
  std::vector<double> v(b.element_field.size());
  run_kernel(
      state, [&] { kernels::serial::apply_transpose(b.op, b.facet_field, v); },
      [&] { kernels::parallel::apply_transpose(b.op, b.facet_field, v); });
  state.SetItemsProcessed(state.iterations() * b.op.elements);
}

void BM_BlockShrink(benchmark::State& state) {
  const BarData& b = bar();
  std::vector<double> y(b.facet_field.size());
  run_kernel(
      state, [&] { kernels::serial::block_shrink(b.facet_field, 3, 0.5, y); },
      [&] { kernels::parallel::block_shrink(b.facet_field, 3, 0.5, y); });
  state.SetItemsProcessed(state.iterations() * b.op.facets);
}

void BM_GroupNorms(benchmark::State& state) {
  const BarData& b = bar();
  std::vector<double> norms(b.op.facets);
  run_kernel(
      state, [&] { kernels::serial::group_norms(b.facet_field, 3, norms); },
      [&] { kernels::parallel::group_norms(b.facet_field, 3, norms); });
  state.SetItemsProcessed(state.iterations() * b.op.facets);
}

void BM_CombineRows(benchmark::State& state) {
  const BarData& b = bar();
  std::vector<double> out(b.element_field.size());
  run_kernel(
      state, [&] { kernels::serial::combine_rows(b.coefficients, b.rows, out); },
      [&] { kernels::parallel::combine_rows(b.coefficients, b.rows, out); });
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(b.rows.size()));
}

// Impact projection and gluing at k = 30 on random fields over ~200 box
// pieces; the per-query cost does not depend on the fields' values.
struct ImpactData {
  Mesh mesh = generators::bar_12k();
  std::unique_ptr<ProjectionCache> cache;
  std::vector<int> boundary;

  ImpactData() {
    const ExplodedMesh em = explode(mesh);
    FractureModes modes;
    modes.dimension = 3;
    modes.elements = mesh.num_elements();
    modes.facets = em.num_facets();
    const MassMatrix mass = assemble_mass(em, 1.0);
    modes.element_masses = mass.element;
    std::mt19937 rng(11);
    std::normal_distribution<double> normal;
    for (int i = 0; i < 30; ++i) {
      Field f(mesh.num_elements(), 3);
      for (Eigen::Index j = 0; j < f.size(); ++j) f.data()[j] = normal(rng);
      modes.fields.push_back(f);
      modes.energies.push_back(i);
    }
    std::vector<int> labels(mesh.num_elements());
    for (int f = 0; f < mesh.num_elements(); ++f) {
      Eigen::Vector3d c = Eigen::Vector3d::Zero();
      for (int j = 0; j < 4; ++j) c += mesh.vertices.row(mesh.elements(f, j)).transpose() / 4.0;
      labels[f] = static_cast<int>(c.x() * 4) * 25 + static_cast<int>(c.y() * 5) * 5 + static_cast<int>(c.z() * 5);
    }
    cache = std::make_unique<ProjectionCache>(mesh, modes, partition_from_labels(em, labels));
    boundary = cache->boundary_vertices();
  }
};

void BM_ImpactProjectGlue(benchmark::State& state) {
  static const ImpactData data;
  omp_set_num_threads(1);
  ImpactQuery q;
  q.normal = Eigen::Vector3d(0.0, 0.6, 0.8);
  std::size_t next = 0;
  int fragments = 0;
  for (auto _ : state) {
    q.point = data.mesh.vertices.row(data.boundary[next++ % data.boundary.size()]).transpose();
    const FracturePattern pattern = data.cache->glue(data.cache->project(q), 0.05);
    fragments += pattern.count;
    benchmark::DoNotOptimize(pattern.labels.data());
  }
  state.counters["pieces"] = data.cache->num_pieces();
  state.counters["fragments"] = benchmark::Counter(fragments, benchmark::Counter::kAvgIterations);
}

}  // namespace

BENCHMARK(BM_JumpApply)->Arg(0)->Arg(1)->Arg(2)->Arg(4);
BENCHMARK(BM_JumpTranspose)->Arg(0)->Arg(1)->Arg(2)->Arg(4);
BENCHMARK(BM_BlockShrink)->Arg(0)->Arg(1)->Arg(2)->Arg(4);
BENCHMARK(BM_GroupNorms)->Arg(0)->Arg(1)->Arg(2)->Arg(4);
BENCHMARK(BM_CombineRows)->Arg(0)->Arg(1)->Arg(2)->Arg(4);
BENCHMARK(BM_ImpactProjectGlue)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
