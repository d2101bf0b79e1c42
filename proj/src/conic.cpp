#include "fracture/conic.hpp"

#include "fracture/error.hpp"
#include "fracture/log.hpp"
#include "fracture/union_find.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace fracture {

namespace kp = kernels::parallel;

struct ConicSubproblem::Factorization {
  Eigen::SimplicialLDLT<SparseMatrix> ldlt;
  std::vector<int> coordinates;
};

ConicSubproblem::ConicSubproblem(const ExplodedMesh& em, const MassMatrix& mass, const FacetWeights& eta,
                                 ConicOptions options)
    : dimension_(em.dimension()),
      unknowns_(em.num_elements() * em.dimension()),
      jump_(kernels::make_jump_operator(em, eta, std::sqrt(static_cast<double>(em.dimension())))),
      options_(options) {
  const int d = dimension_;
  const int m = em.num_elements();
  dof_mass_.resize(unknowns_);
  for (int f = 0; f < m; ++f) {
    for (int c = 0; c < d; ++c) dof_mass_[f * d + c] = mass.element[f];
  }

  double jump_trace = 0.0;
  for (double w : jump_.weights) jump_trace += 2.0 * w * w;
  proximal_ = options_.proximal_weight * jump_trace / dof_mass_.sum();
  if (!(proximal_ > 0.0)) proximal_ = options_.proximal_weight;

  // Coordinates with identical weight columns share one factorization.
  factors_.resize(d);
  for (int c = 0; c < d; ++c) {
    for (int prev = 0; prev < c && !factors_[c]; ++prev) {
      bool same = true;
      for (int e = 0; e < jump_.facets && same; ++e) {
        same = jump_.weights[e * d + c] == jump_.weights[e * d + prev];
      }
      if (same) {
        factors_[c] = factors_[prev];
        factors_[c]->coordinates.push_back(c);
      }
    }
    if (factors_[c]) continue;
    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(static_cast<std::size_t>(jump_.facets) * 4 + m);
    for (int e = 0; e < jump_.facets; ++e) {
      const double w2 = jump_.weights[e * d + c] * jump_.weights[e * d + c];
      const int f = jump_.pairs[e][0], g = jump_.pairs[e][1];
      entries.emplace_back(f, f, w2);
      entries.emplace_back(g, g, w2);
      entries.emplace_back(f, g, -w2);
      entries.emplace_back(g, f, -w2);
    }
    for (int f = 0; f < m; ++f) entries.emplace_back(f, f, proximal_ * mass.element[f]);
    SparseMatrix system(m, m);
    system.setFromTriplets(entries.begin(), entries.end());
    auto factor = std::make_shared<Factorization>();
    factor->ldlt.compute(system);
    if (factor->ldlt.info() != Eigen::Success) {
      throw Error(ErrorCode::not_converged, "jump system factorization failed");
    }
    factor->coordinates.push_back(c);
    factors_[c] = factor;
  }
  prior_rows_.resize(0, unknowns_);
  prior_solves_.resize(unknowns_, 0);
}

ConicSubproblem::~ConicSubproblem() = default;
ConicSubproblem::ConicSubproblem(ConicSubproblem&&) noexcept = default;

Eigen::VectorXd ConicSubproblem::solve_jump_system(const Eigen::VectorXd& rhs) const {
  const int d = dimension_;
  const int m = unknowns_ / d;
  Eigen::VectorXd out(unknowns_);
  for (int c = 0; c < d; ++c) {
    const auto& factor = factors_[c];
    if (factor->coordinates.front() != c) continue;
    const auto& coords = factor->coordinates;
    Eigen::MatrixXd block(m, static_cast<Eigen::Index>(coords.size()));
    for (std::size_t j = 0; j < coords.size(); ++j) {
      for (int f = 0; f < m; ++f) block(f, j) = rhs[f * d + coords[j]];
    }
    const Eigen::MatrixXd solved = factor->ldlt.solve(block);
    for (std::size_t j = 0; j < coords.size(); ++j) {
      for (int f = 0; f < m; ++f) out[f * d + coords[j]] = solved(f, j);
    }
  }
  return out;
}

void ConicSubproblem::set_priors(const std::vector<Field>& priors) {
  const auto count = static_cast<Eigen::Index>(priors.size());
  prior_rows_.resize(count, unknowns_);
  prior_solves_.resize(unknowns_, count);
  for (Eigen::Index j = 0; j < count; ++j) {
    if (priors[j].size() != unknowns_) throw Error(ErrorCode::invalid_argument, "prior has wrong size");
    prior_rows_.row(j) = (flat(priors[j]).array() * dof_mass_.array()).transpose();
    prior_solves_.col(j) = solve_jump_system(prior_rows_.row(j).transpose());
  }
}

double ConicSubproblem::objective(const Field& field) const {
  std::vector<double> jumps(static_cast<std::size_t>(jump_.facets) * dimension_);
  std::vector<double> norms(jump_.facets);
  kp::apply(jump_, {field.data(), static_cast<std::size_t>(field.size())}, jumps);
  kp::group_norms(jumps, dimension_, norms);
  return kernels::ordered_sum(norms);
}

namespace {

double group_norm_sum(std::span<const double> x, int d) {
  std::vector<double> norms(x.size() / d);
  kp::group_norms(x, d, norms);
  return kernels::ordered_sum(norms);
}

std::span<const double> view(const Eigen::VectorXd& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }
std::span<double> view(Eigen::VectorXd& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

}  // namespace

ConicResult ConicSubproblem::solve(const Field& normalization, ConicState* state) const {
  const int d = dimension_;
  const int md = unknowns_;
  const int pd = jump_.facets * d;
  if (normalization.size() != md) throw Error(ErrorCode::invalid_argument, "normalization field has wrong size");
  const Eigen::Map<const Eigen::VectorXd> c(normalization.data(), md);

  const Eigen::Index np = prior_rows_.rows();
  const Eigen::Index nc = np + 1;
  Eigen::MatrixXd constraints(nc, md);
  constraints.topRows(np) = prior_rows_;
  constraints.row(np) = (c.array() * dof_mass_.array()).transpose();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nc);
  rhs[np] = 1.0;

  Eigen::MatrixXd solves(md, nc);
  solves.leftCols(np) = prior_solves_;
  solves.col(np) = solve_jump_system(constraints.row(np).transpose());
  const Eigen::MatrixXd schur = constraints * solves;
  Eigen::LDLT<Eigen::MatrixXd> schur_ldlt(0.5 * (schur + schur.transpose()));
  const Eigen::VectorXd pivots = schur_ldlt.vectorD().cwiseAbs();
  if (schur_ldlt.info() != Eigen::Success || pivots.minCoeff() <= 1e-12 * pivots.maxCoeff()) {
    throw Error(ErrorCode::infeasible, "normalization field is dependent on the priors");
  }

  // Minimizer of the proximal quadratic model subject to the equalities.
  auto project = [&](const Eigen::VectorXd& r) -> Eigen::VectorXd {
    const Eigen::VectorXd base = solve_jump_system(r);
    const Eigen::VectorXd mu = schur_ldlt.solve(constraints * base - rhs);
    return base - solves * mu;
  };

  ConicResult result;
  auto finish = [&](const Eigen::VectorXd& v) {
    result.field = Eigen::Map<const Field>(v.data(), md / d, d);
    result.objective = objective(result.field);
    result.constraint_residual = (constraints * v - rhs).cwiseAbs().maxCoeff();
    return result;
  };

  // Zero objective is attainable when c itself is feasible and continuous.
  {
    const double residual = (constraints * c - rhs).cwiseAbs().maxCoeff();
    Eigen::VectorXd jumps(pd);
    kp::apply(jump_, view(Eigen::VectorXd(c)), view(jumps));
    const double scale = c.cwiseAbs().maxCoeff() *
                         (jump_.weights.empty() ? 1.0 : *std::max_element(jump_.weights.begin(), jump_.weights.end()));
    if (residual <= 1e-12 && (pd == 0 || jumps.cwiseAbs().maxCoeff() <= 1e-10 * scale)) {
      result.converged = true;
      if (state) *state = {c, jumps, Eigen::VectorXd::Zero(pd), 1.0};
      return finish(c);
    }
  }

  Eigen::VectorXd v, y, u;
  double rho = 0.0;
  if (state && state->v.size() == md && state->y.size() == pd && state->rho > 0.0) {
    v = state->v;
    y = state->y;
    u = state->u;
    rho = state->rho;
  } else {
    v = c;
    y.resize(pd);
    kp::apply(jump_, view(v), view(y));
    u = Eigen::VectorXd::Zero(pd);
    const double mean_jump = group_norm_sum(view(y), d) / std::max(1, jump_.facets);
    rho = mean_jump > 0.0 ? 1.0 / mean_jump : 1.0;
  }

  const double alpha = options_.relaxation;
  const double tol = options_.tolerance;
  Eigen::VectorXd gv(pd), h(pd), y_old(pd), shifted(pd), back(md), back_u(md), r(md), v_old(md);
  double primal = 0.0, dual = 0.0;
  int iter = 0;
  const Eigen::MatrixXd gram = constraints * constraints.transpose();
  const Eigen::LDLT<Eigen::MatrixXd> gram_ldlt(gram);
  // Dual bound from z = rho u:  max b^T nu  s.t.  G^T z = A^T nu, |z_e| <= 1.
  double dual_infeasibility = 0.0;
  auto dual_bound = [&](const Eigen::VectorXd& multiplier, double penalty) {
    const Eigen::VectorXd z = penalty * multiplier;
    Eigen::VectorXd gz(md);
    kp::apply_transpose(jump_, view(z), view(gz));
    const Eigen::VectorXd nu = gram_ldlt.solve(constraints * gz);
    dual_infeasibility = (gz - constraints.transpose() * nu).norm() / std::max(1.0, gz.norm());
    return nu[np];
  };
  std::vector<int> settled_labels;
  double settled_objective = 0.0;
  std::optional<Eigen::VectorXd> early;
  for (iter = 1; iter <= options_.max_iterations; ++iter) {
    shifted = y - u;
    kp::apply_transpose(jump_, view(shifted), view(back));
    r = back + proximal_ * dof_mass_.cwiseProduct(v);
    v_old = v;
    v = project(r);

    kp::apply(jump_, view(v), view(gv));
    h = alpha * gv + (1.0 - alpha) * y;
    y_old = y;
    shifted = h + u;
    kp::block_shrink(view(shifted), d, 1.0 / rho, view(y));
    u += h - y;

    shifted = y - y_old;
    kp::apply_transpose(jump_, view(shifted), view(back));
    kp::apply_transpose(jump_, view(u), view(back_u));
    const double primal_scale = std::max({gv.norm(), y.norm(), 1e-300});
    const double dual_scale = std::max(rho * back_u.norm(), 1e-300);
    primal = (gv - y).norm() / primal_scale;
    dual = rho * (back.norm() + proximal_ * dof_mass_.cwiseProduct(v - v_old).norm()) / dual_scale;
    if (primal <= tol && dual <= tol) break;
    if (iter % 1000 == 0) {
      logger().trace("admm {}: primal {:.3g} dual {:.3g} rho {:.3g} objective {:.12g}", iter, primal, dual, rho,
                     objective(Eigen::Map<const Field>(v.data(), md / d, d)));
    }

    // Once loosely converged, stop as soon as polishing settles on the same
    // partition twice and beats the current iterate with a small dual gap.
    if (options_.polish && iter % options_.polish_interval == 0 && primal <= options_.polish_threshold &&
        dual <= options_.polish_threshold) {
      Eigen::VectorXd candidate = v;
      double candidate_objective = 0.0;
      std::vector<int> labels;
      const double current = objective(Eigen::Map<const Field>(v.data(), md / d, d));
      const bool polished = polish(y, constraints, rhs, candidate, candidate_objective, &labels);
      logger().trace("admm {}: polish {} objective {:.12g} current {:.12g}", iter, polished ? "ok" : "failed",
                     candidate_objective, current);
      if (polished && candidate_objective <= current + tol * (1.0 + current)) {
        const double gap = candidate_objective - dual_bound(u, rho);
        logger().trace("admm {}: polish gap {:.3g} pieces {}", iter, gap,
                       labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1);
        if (labels == settled_labels &&
            std::abs(candidate_objective - settled_objective) <= tol * (1.0 + candidate_objective) &&
            gap <= options_.polish_gap * (1.0 + candidate_objective)) {
          early = std::move(candidate);
          break;
        }
        settled_labels = std::move(labels);
        settled_objective = candidate_objective;
      } else {
        settled_labels.clear();
      }
    }

    if (iter % options_.adapt_interval == 0 && iter <= options_.adapt_limit && primal > 0.0 && dual > 0.0) {
      const double factor = std::clamp(std::sqrt(primal / dual), 0.1, 10.0);
      if (factor > 5.0 || factor < 0.2) {
        rho *= factor;
        u /= factor;
      }
    }
  }
  result.iterations = std::min(iter, options_.max_iterations);
  result.primal_residual = primal;
  result.dual_residual = dual;
  result.converged = early.has_value() || (primal <= tol && dual <= tol);

  const double bound = dual_bound(u, rho);
  result.dual_residual = std::max(result.dual_residual, dual_infeasibility);

  double current = objective(Eigen::Map<const Field>(v.data(), md / d, d));
  if (early) {
    v = *early;
    current = settled_objective;
    result.polished = true;
  } else if (options_.polish) {
    Eigen::VectorXd polished = v;
    double polished_objective = current;
    if (polish(y, constraints, rhs, polished, polished_objective) &&
        polished_objective <= current + tol * (1.0 + current)) {
      v = polished;
      current = polished_objective;
      result.polished = true;
    }
  }

  if (state) {
    kp::apply(jump_, view(v), view(gv));
    state->v = v;
    state->y = gv;
    state->u = u;
    state->rho = rho;
  }
  finish(v);
  result.duality_gap = result.objective - bound;
  return result;
}

bool ConicSubproblem::polish(const Eigen::VectorXd& y, const Eigen::MatrixXd& constraints,
                             const Eigen::VectorXd& rhs, Eigen::VectorXd& v, double& objective_value,
                             std::vector<int>* labels_out) const {
  const int d = dimension_;
  const int m = unknowns_ / d;

  // Pieces: components of the element graph over facets the iterate glues.
  UnionFind sets(m);
  for (int e = 0; e < jump_.facets; ++e) {
    bool glued = true;
    for (int c = 0; c < d && glued; ++c) glued = y[e * d + c] == 0.0;
    if (glued) sets.unite(jump_.pairs[e][0], jump_.pairs[e][1]);
  }

  struct Cut {
    int facet, a, b;
    Eigen::VectorXd w;
  };
  struct Reduced {
    std::vector<int> label;
    std::vector<Cut> cuts;
    Eigen::VectorXd point;
    double value = 0.0;
  };

  // Exact minimization over per-piece translations for one partition.
  auto solve_partition = [&](UnionFind& partition, Reduced& out) {
    int pieces = 0;
    out.label = partition.labels(&pieces);
    const std::vector<int>& label = out.label;
    const int reduced = pieces * d;
    if (reduced > 600) return false;

    // Restrict constraints and the objective to per-piece translations.
    const Eigen::Index nc = constraints.rows();
    Eigen::MatrixXd reduced_constraints = Eigen::MatrixXd::Zero(nc, reduced);
    Eigen::VectorXd start = Eigen::VectorXd::Zero(reduced);
    Eigen::VectorXd piece_mass = Eigen::VectorXd::Zero(pieces);
    for (int f = 0; f < m; ++f) {
      const int a = label[f];
      piece_mass[a] += dof_mass_[f * d];
      for (int c = 0; c < d; ++c) {
        reduced_constraints.col(a * d + c) += constraints.col(f * d + c);
        start[a * d + c] += dof_mass_[f * d] * v[f * d + c];
      }
    }
    for (int a = 0; a < pieces; ++a) start.segment(a * d, d) /= piece_mass[a];

    out.cuts.clear();
    for (int e = 0; e < jump_.facets; ++e) {
      const int a = label[jump_.pairs[e][0]], b = label[jump_.pairs[e][1]];
      if (a == b) continue;
      out.cuts.push_back({e, a, b, Eigen::Map<const Eigen::VectorXd>(&jump_.weights[e * d], d)});
    }
    const std::vector<Cut>& cuts = out.cuts;

    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(reduced_constraints);
    Eigen::VectorXd point = start - cod.solve(reduced_constraints * start - rhs);
    if ((reduced_constraints * point - rhs).cwiseAbs().maxCoeff() > 1e-11) return false;

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(reduced_constraints.transpose());
    const Eigen::Index rank = qr.rank();
    const Eigen::MatrixXd q = qr.householderQ();
    const Eigen::MatrixXd null_basis = q.rightCols(reduced - rank);

    auto evaluate = [&](const Eigen::VectorXd& t) {
      double total = 0.0;
      for (const Cut& cut : cuts) {
        total += (cut.w.array() * (t.segment(cut.a * d, d) - t.segment(cut.b * d, d)).array()).matrix().norm();
      }
      return total;
    };

    double value = evaluate(point);
    for (int step = 0; step < 100 && null_basis.cols() > 0; ++step) {
      Eigen::VectorXd grad = Eigen::VectorXd::Zero(reduced);
      Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(reduced, reduced);
      for (const Cut& cut : cuts) {
        const Eigen::VectorXd jump =
            cut.w.array() * (point.segment(cut.a * d, d) - point.segment(cut.b * d, d)).array();
        const double norm = jump.norm();
        if (norm <= 1e-300) continue;
        const Eigen::VectorXd dir = jump / norm;
        const Eigen::VectorXd g = cut.w.cwiseProduct(dir);
        const Eigen::MatrixXd local =
            cut.w.asDiagonal() * (Eigen::MatrixXd::Identity(d, d) - dir * dir.transpose()) * cut.w.asDiagonal() / norm;
        grad.segment(cut.a * d, d) += g;
        grad.segment(cut.b * d, d) -= g;
        hess.block(cut.a * d, cut.a * d, d, d) += local;
        hess.block(cut.b * d, cut.b * d, d, d) += local;
        hess.block(cut.a * d, cut.b * d, d, d) -= local;
        hess.block(cut.b * d, cut.a * d, d, d) -= local;
      }
      const Eigen::VectorXd reduced_grad = null_basis.transpose() * grad;
      if (reduced_grad.norm() <= 1e-15 * (1.0 + value)) break;
      Eigen::MatrixXd reduced_hess = null_basis.transpose() * hess * null_basis;
      const double reg = 1e-12 * (reduced_hess.trace() / reduced_hess.rows() + 1.0);
      reduced_hess.diagonal().array() += reg;
      const Eigen::VectorXd direction = null_basis * reduced_hess.ldlt().solve(-reduced_grad);
      const double slope = grad.dot(direction);
      if (!(slope < 0.0)) break;
      double t = 1.0;
      bool moved = false;
      for (int halving = 0; halving < 60; ++halving, t *= 0.5) {
        const Eigen::VectorXd trial = point + t * direction;
        const double trial_value = evaluate(trial);
        if (trial_value <= value + 1e-4 * t * slope) {
          const double previous = value;
          point = trial;
          value = trial_value;
          moved = previous - value > 1e-16 * previous;
          break;
        }
      }
      if (!moved) break;
    }
    if (!std::isfinite(value)) return false;
    out.point = std::move(point);
    out.value = value;
    return true;
  };

  Reduced best;
  if (!solve_partition(sets, best)) return false;

  // A cut whose jump collapses leaves the objective non-smooth at the
  // optimum, where Newton stalls and the result depends on the start. Its
  // pieces belong together; merging them is a restriction with the same
  // infimum, so keep the merge whenever it is no worse.
  for (int round = 0; round < 8; ++round) {
    double largest = 0.0;
    std::vector<double> jumps(best.cuts.size());
    for (std::size_t j = 0; j < best.cuts.size(); ++j) {
      const Cut& cut = best.cuts[j];
      jumps[j] = (cut.w.array() * (best.point.segment(cut.a * d, d) - best.point.segment(cut.b * d, d)).array())
                     .matrix()
                     .norm();
      largest = std::max(largest, jumps[j]);
    }
    UnionFind merged = sets;
    bool any = false;
    for (std::size_t j = 0; j < best.cuts.size(); ++j) {
      if (jumps[j] <= 1e-7 * largest) {
        any |= merged.unite(jump_.pairs[best.cuts[j].facet][0], jump_.pairs[best.cuts[j].facet][1]);
      }
    }
    if (!any) break;
    Reduced candidate;
    if (!solve_partition(merged, candidate) || candidate.value > best.value * (1.0 + 1e-12)) break;
    sets = merged;
    best = std::move(candidate);
  }

  if (labels_out) *labels_out = best.label;
  for (int f = 0; f < m; ++f) v.segment(f * d, d) = best.point.segment(best.label[f] * d, d);
  objective_value = objective(Eigen::Map<const Field>(v.data(), m, d));
  return (constraints * v - rhs).cwiseAbs().maxCoeff() <= 1e-11;
}

ConicResult solve_conic_subproblem(const ExplodedMesh& em, const MassMatrix& mass, const FacetWeights& eta,
                                   const Field& normalization, const std::vector<Field>& priors,
                                   const ConicOptions& options) {
  ConicSubproblem problem(em, mass, eta, options);
  problem.set_priors(priors);
  return problem.solve(normalization);
}

}  // namespace fracture
