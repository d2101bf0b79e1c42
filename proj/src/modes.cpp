#include "fracture/modes.hpp"

#include "fracture/error.hpp"
#include "fracture/kernels.hpp"
#include "fracture/log.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace fracture {

double mass_inner(const Field& a, const Field& b, const std::vector<double>& element_mass) {
  double total = 0.0;
  for (Eigen::Index f = 0; f < a.rows(); ++f) total += element_mass[f] * a.row(f).dot(b.row(f));
  return total;
}

ModeInitialization eigen_init(const ExplodedMesh& em, const SparseMatrix& laplacian,
                              const std::vector<double>& vertex_mass, int k, int extra_vectors) {
  const Mesh& mesh = em.base;
  const int d = mesh.dimension();
  const int n = mesh.num_vertices();
  if (k < 0 || k > d * n) throw Error(ErrorCode::out_of_range, "k exceeds d * vertex count");
  const int needed = (k + d - 1) / d;
  const int extra = extra_vectors >= 0 ? extra_vectors : std::max(4, needed);
  const int count = std::min(n, needed + extra);

  ModeInitialization init;
  init.eigen = smallest_eigenpairs(laplacian, Eigen::Map<const Eigen::VectorXd>(vertex_mass.data(), n), count);
  for (int j = 0; j < count; ++j) {
    Eigen::VectorXd averaged(mesh.num_elements());
    for (int f = 0; f < mesh.num_elements(); ++f) {
      double sum = 0.0;
      for (int c = 0; c <= d; ++c) sum += init.eigen.vectors(mesh.elements(f, c), j);
      averaged[f] = sum / (d + 1);
    }
    for (int axis = 0; axis < d; ++axis) {
      Field field = Field::Zero(mesh.num_elements(), d);
      field.col(axis) = averaged;
      init.fields.push_back(std::move(field));
      init.origin.emplace_back(j, axis);
    }
  }
  return init;
}

namespace {

// Orthogonalize against the priors (two Gram-Schmidt passes) and normalize;
// empty when the candidate is dependent on them.
std::optional<Field> orthonormalize(Field candidate, const std::vector<Field>& priors,
                                    const std::vector<double>& mass) {
  const double original = std::sqrt(mass_inner(candidate, candidate, mass));
  if (!(original > 0.0)) return std::nullopt;
  for (int pass = 0; pass < 2; ++pass) {
    for (const Field& prior : priors) candidate -= mass_inner(prior, candidate, mass) * prior;
  }
  const double norm = std::sqrt(mass_inner(candidate, candidate, mass));
  if (norm <= 1e-8 * original) return std::nullopt;
  candidate /= norm;
  return candidate;
}

}  // namespace

FractureModes compute_modes(const Mesh& mesh, const SolverConfig& config, const std::optional<FacetWeights>& eta) {
  return compute_modes(explode(mesh), config, eta);
}

FractureModes compute_modes(const ExplodedMesh& em, const SolverConfig& config,
                            const std::optional<FacetWeights>& eta_opt) {
  const int d = em.dimension();
  const int m = em.num_elements();
  if (config.k < d) throw Error(ErrorCode::invalid_argument, "k must be at least the dimension");
  if (config.k > d * m) throw Error(ErrorCode::invalid_argument, "k exceeds the per-element field dimension d * m");
  if (!(config.epsilon > 0.0)) throw Error(ErrorCode::invalid_argument, "epsilon must be positive");

  const FacetWeights eta = eta_opt ? *eta_opt : unit_eta(em);
  const MassMatrix mass = assemble_mass(em, config.density);
  const StiffnessMatrix stiffness = assemble_stiffness(em);
  const ModeInitialization init = eigen_init(em, stiffness.vertex, mass.vertex, config.k);

  ConicOptions options;
  options.tolerance = config.conic_tolerance;
  ConicSubproblem conic(em, mass, eta, options);

  FractureModes modes;
  modes.dimension = d;
  modes.elements = m;
  modes.facets = em.num_facets();
  modes.element_masses = mass.element;
  modes.eta = eta;

  std::size_t next_candidate = 0;
  std::mt19937_64 fallback_rng(0xf4ac);
  std::normal_distribution<double> gaussian;
  std::vector<Field> priors;
  for (int i = 0; i < config.k; ++i) {
    const auto started = std::chrono::steady_clock::now();
    std::optional<Field> start;
    while (!start && next_candidate < init.fields.size()) {
      start = orthonormalize(init.fields[next_candidate++], priors, mass.element);
    }
    for (int attempt = 0; !start && attempt < 16; ++attempt) {
      logger().warn("mode {}: eigen initializations exhausted, using a pseudo-random start", i + 1);
      Field random(m, d);
      for (Eigen::Index j = 0; j < random.size(); ++j) random.data()[j] = gaussian(fallback_rng);
      start = orthonormalize(std::move(random), priors, mass.element);
    }
    if (!start) throw Error(ErrorCode::infeasible, "no admissible initialization for mode " + std::to_string(i + 1));

    Field normalization = std::move(*start);
    conic.set_priors(priors);
    ConicState state;
    ModeStats stats;
    double previous_objective = std::numeric_limits<double>::infinity();
    bool converged = false;
    for (int it = 1; it <= config.max_inner_iters; ++it) {
      const ConicResult solved = conic.solve(normalization, &state);
      stats.inner_iterations = it;
      stats.conic_iterations += solved.iterations;
      stats.duality_gap = solved.duality_gap;
      stats.polished = solved.polished;
      if (!solved.converged) {
        logger().warn("mode {}: conic solve stopped after {} iterations (primal {:.3g}, dual {:.3g})", i + 1,
                      solved.iterations, solved.primal_residual, solved.dual_residual);
      }
      if (it > 1 && solved.objective > previous_objective * (1.0 + 1e-9) + 1e-15) {
        logger().warn("mode {}: subproblem objective rose from {:.12g} to {:.12g} at iteration {}", i + 1,
                      previous_objective, solved.objective, it);
      }
      previous_objective = solved.objective;

      const double norm = std::sqrt(mass_inner(solved.field, solved.field, mass.element));
      const Field diff = solved.field - normalization;
      const double change = std::sqrt(mass_inner(diff, diff, mass.element));
      normalization = solved.field / norm;
      state.v /= norm;
      state.y /= norm;
      logger().debug("mode {} iteration {}: objective {:.12g} change {:.3g} conic {} iters", i + 1, it,
                     solved.objective, change, solved.iterations);
      if (change <= config.epsilon) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      throw Error(ErrorCode::not_converged,
                  "mode " + std::to_string(i + 1) + " did not converge within " +
                      std::to_string(config.max_inner_iters) + " fixed-point iterations");
    }
    stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    priors.push_back(normalization);
    modes.stats.push_back(stats);
    logger().info("mode {}: {} fixed-point iterations, {} conic iterations, {:.3f}s", i + 1,
                  stats.inner_iterations, stats.conic_iterations, stats.seconds);
  }

  const kernels::JumpOperator unscaled = kernels::make_jump_operator(em, eta, 1.0);
  std::vector<double> jumps(static_cast<std::size_t>(em.num_facets()) * d);
  std::vector<double> energies(config.k);
  std::vector<Eigen::VectorXd> facet_jumps(config.k);
  for (int i = 0; i < config.k; ++i) {
    facet_jumps[i].resize(em.num_facets());
    kernels::parallel::apply(unscaled, {priors[i].data(), static_cast<std::size_t>(priors[i].size())}, jumps);
    kernels::parallel::group_norms(jumps, d, {facet_jumps[i].data(), static_cast<std::size_t>(em.num_facets())});
    energies[i] = kernels::ordered_sum({facet_jumps[i].data(), static_cast<std::size_t>(em.num_facets())});
  }

  // Sequential solves can finish out of energy order (e.g. axis-aligned
  // initializations under anisotropic eta). Order by energy, keeping the
  // initialization order among ties.
  const double top = std::max(1e-300, *std::max_element(energies.begin(), energies.end()));
  std::vector<long long> key(config.k);
  for (int i = 0; i < config.k; ++i) key[i] = std::llround(energies[i] / (1e-9 * top));
  std::vector<int> order(config.k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return key[a] < key[b]; });
  if (!std::is_sorted(key.begin(), key.end())) {
    logger().info("reordering modes by energy");
  }

  const double sqrt_d = std::sqrt(static_cast<double>(d));
  for (int idx : order) {
    modes.fields.push_back(priors[idx]);
    modes.energies.push_back(energies[idx]);
    modes.objectives.push_back(sqrt_d * energies[idx]);
    modes.facet_jumps.push_back(facet_jumps[idx]);
  }
  std::vector<ModeStats> stats(config.k);
  for (int i = 0; i < config.k; ++i) stats[i] = modes.stats[order[i]];
  modes.stats = std::move(stats);
  return modes;
}

double mode_energy(const FractureModes& modes, int i) {
  if (i < 1 || i > modes.k()) throw Error(ErrorCode::out_of_range, "mode index out of range");
  return modes.energies[i - 1];
}

double recompute_mode_energy(const ExplodedMesh& em, const FractureModes& modes, int i) {
  if (i < 1 || i > modes.k()) throw Error(ErrorCode::out_of_range, "mode index out of range");
  const DiscontinuityOperator op = assemble_discontinuity(em, modes.eta);
  return op.facet_energies_element(modes.fields[i - 1]).sum();
}

double orthonormality_error(const FractureModes& modes) {
  double worst = 0.0;
  for (int i = 0; i < modes.k(); ++i) {
    for (int j = 0; j <= i; ++j) {
      const double target = i == j ? 1.0 : 0.0;
      worst = std::max(worst, std::abs(mass_inner(modes.fields[i], modes.fields[j], modes.element_masses) - target));
    }
  }
  return worst;
}

}  // namespace fracture
