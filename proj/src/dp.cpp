#include "hinfx/dp.hpp"

#include <spdlog/spdlog.h>

#include <numeric>

#include "hinfx/errors.hpp"

namespace hinfx {

namespace {

double min_eig(const MatrixXd& S) {
  return Eigen::SelfAdjointEigenSolver<MatrixXd>(0.5 * (S + S.transpose())).eigenvalues()(0);
}

std::vector<int> first_coords(int n) {
  std::vector<int> keep(n);
  std::iota(keep.begin(), keep.end(), 0);
  return keep;
}

bool window_mode(const ProblemSpec& spec) { return spec.mode != DpMode::Constrained; }

// l(x, u, w) as a quadratic form on (x, u, w).
QuadraticForm stage_cost_form(const GameModel& g) {
  const int n = g.n(), m = g.m(), p = g.p();
  QuadraticForm f = QuadraticForm::zero(n + m + p);
  f.Q.topLeftCorner(n, n) = g.Q;
  f.Q.block(n, n, m, m) = g.R;
  f.Q.bottomRightCorner(p, p) = -g.gamma * g.gamma * MatrixXd::Identity(p, p);
  return f;
}

MatrixXd dynamics_map(const GameModel& g) {
  MatrixXd F(g.n(), g.n() + g.m() + g.p());
  F << g.A, g.B, g.G;
  return F;
}

// (x, u) with A x + B u in target (-) G W.
Polytope robust_pairs(const ProblemSpec& spec, const Polytope& xu, const Polytope& target) {
  const auto& g = spec.model;
  const Polytope eroded = pontryagin_difference(target, g.G, spec.W, spec.tol);
  MatrixXd F(g.n(), g.n() + g.m());
  F << g.A, g.B;
  const Polytope pre = affine_preimage(eroded, F, VectorXd::Zero(g.n()), spec.tol);
  return add_rows(xu, pre.H(), pre.h(), spec.tol);
}

ExploreOptions explore_options(const ProblemSpec& spec, int stage, int salt) {
  ExploreOptions opt;
  opt.tol = spec.tol;
  opt.budgets = spec.budgets;
  opt.resolve_overlaps = spec.resolve_overlaps;
  opt.seed = spec.seed + 1000003ULL * static_cast<std::uint64_t>(stage) +
             static_cast<std::uint64_t>(salt);
  return opt;
}

template <class F>
auto with_stage(int j, F&& f) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const GammaInfeasibleError& e) {
    throw GammaInfeasibleError("stage " + std::to_string(j) + ": " + e.what());
  } catch (const Error& e) {
    throw StageError(j, e.what());
  }
}

}  // namespace

void ProblemSpec::validate() const {
  model.validate();
  const int n = model.n();
  if (X.dim() != n) throw InputError("X must live in the state space");
  if (U.dim() != model.m()) throw InputError("U must live in the input space");
  if (W.dim() != model.p()) throw InputError("W must live in the disturbance space");
  if (Xf.dim() != n) throw InputError("Xf must live in the state space");
  if (Pf.rows() != n || Pf.cols() != n) throw InputError("Pf must be n x n");
  if ((Pf - Pf.transpose()).cwiseAbs().maxCoeff() > 1e-12) throw InputError("Pf is not symmetric");
  if (min_eig(Pf) <= 0.0) throw InputError("Pf is not positive definite");
  if (N < 0) throw InputError("horizon N must be nonnegative");
  const auto origin_inside = [&](const Polytope& P, int dim, const char* name) {
    if (P.is_empty() || P.max_violation(VectorXd::Zero(dim)) >= -tol.feas)
      throw InputError(std::string(name) + " must contain the origin in its interior");
  };
  origin_inside(X, n, "X");
  origin_inside(U, model.m(), "U");
  origin_inside(W, model.p(), "W");
  origin_inside(Xf, n, "Xf");
  if (!is_subset(Xf, X, tol.feas)) throw InputError("Xf must be a subset of X");
  if (window) {
    if (window->dim() != n) throw InputError("window must live in the state space");
    origin_inside(*window, n, "window");
  }
}

Polytope ProblemSpec::working_window() const {
  if (window) return *window;
  auto [lo, hi] = bounding_box(Xf, tol);
  const double scale = 2.0 * std::max(N, 1);
  return Polytope::box(scale * lo, scale * hi, tol);
}

Polytope next_state_set(const ProblemSpec& spec, const Polytope& Xprev) {
  const auto& g = spec.model;
  const int n = g.n();
  if (!window_mode(spec)) {
    const Polytope Z = robust_pairs(spec, product(spec.X, spec.U, spec.tol), Xprev);
    if (!Z.is_full_dimensional(spec.tol.interior)) throw InfeasibleError("Z_{j-1} is empty");
    Polytope Xj = intersect(project(Z, first_coords(n), spec.tol), spec.X, spec.tol);
    if (!Xj.is_full_dimensional(spec.tol.interior)) throw InfeasibleError("X_j is empty");
    return Xj;
  }
  // Successors stay in X_{j-1} for every u in U and w in W.
  Polytope target = pontryagin_difference(Xprev, g.G, spec.W, spec.tol);
  target = pontryagin_difference(target, g.B, spec.U, spec.tol);
  if (target.is_empty()) throw InfeasibleError("window shrank to the empty set");
  const Polytope pre = affine_preimage(target, g.A, VectorXd::Zero(n), spec.tol);
  Polytope Xj = intersect(spec.working_window(), pre, spec.tol);
  if (!Xj.is_full_dimensional(spec.tol.interior)) throw InfeasibleError("window shrank to the empty set");
  return Xj;
}

MaxStageProblem build_max_problem(const ProblemSpec& spec, const PwqFunction& Vprev,
                                  const Polytope& Xprev, const Polytope& Xnext) {
  const auto& g = spec.model;
  const auto& tol = spec.tol;
  const int n = g.n(), m = g.m();
  const MatrixXd F = dynamics_map(g);
  const VectorXd zero = VectorXd::Zero(n);

  const Polytope xset = window_mode(spec) ? Xnext : spec.X;
  const Polytope base = product(product(xset, spec.U, tol), spec.W, tol);
  const Polytope pre = affine_preimage(Xprev, F, zero, tol);
  Polytope Phi = add_rows(base, pre.H(), pre.h(), tol);
  if (!Phi.is_full_dimensional(tol.interior)) throw InfeasibleError("Phi is empty");
  Phi = remove_redundancy(Phi, tol);

  const QuadraticForm ell = stage_cost_form(g);
  MaxStageProblem out;
  out.Phi = Phi;
  auto& obj = out.problem.objective;
  obj.domain = Phi;
  for (int i = 0; i < Vprev.size(); ++i) {
    const Polytope cpre = affine_preimage(Vprev.cells[i], F, zero, tol);
    Polytope cell = add_rows(Phi, cpre.H(), cpre.h(), tol);
    if (!cell.is_full_dimensional(tol.interior)) continue;
    obj.cells.push_back(remove_redundancy(cell, tol));
    obj.pieces.push_back(ell + Vprev.pieces[i].compose(F, zero));
  }
  if (obj.cells.empty()) throw InfeasibleError("no cell of V_{j-1} is reachable");

  Polytope Z;
  if (window_mode(spec))
    Z = product(Xnext, spec.U, tol);
  else if (spec.max_domain == MaxDomain::Robust)
    Z = remove_redundancy(robust_pairs(spec, product(spec.X, spec.U, tol), Xprev), tol);
  else
    Z = project(Phi, first_coords(n + m), tol);
  out.problem.constraint = base;
  out.problem.domain = Z;
  out.problem.param_dim = n + m;
  out.problem.mode = Mode::Max;
  return out;
}

MinStageProblem build_min_problem(const ProblemSpec& spec, const PwqFunction& J,
                                  const Polytope& Xprev, const Polytope& Xnext) {
  const auto& tol = spec.tol;
  MinStageProblem out;
  Polytope xu = window_mode(spec) ? product(Xnext, spec.U, tol)
                                  : robust_pairs(spec, product(spec.X, spec.U, tol), Xprev);
  xu = add_rows(xu, J.domain.H(), J.domain.h(), tol);
  if (!xu.is_full_dimensional(tol.interior)) throw InfeasibleError("Z_{j-1} is empty");
  out.feasible_xu = remove_redundancy(xu, tol);
  out.problem.objective = J;
  out.problem.constraint = out.feasible_xu;
  out.problem.domain = Xnext;
  out.problem.param_dim = spec.model.n();
  out.problem.mode = Mode::Min;
  return out;
}

ParametricSolution stage_max(const ProblemSpec& spec, const PwqFunction& Vprev,
                             const Polytope& Xprev, const Polytope& Xnext) {
  const auto& g = spec.model;
  for (int i = 0; i < Vprev.size(); ++i) {
    const MatrixXd M = g.gamma * g.gamma * MatrixXd::Identity(g.p(), g.p()) -
                       g.G.transpose() * Vprev.pieces[i].Q * g.G;
    const double e = min_eig(M);
    if (e <= 0.0)
      throw GammaInfeasibleError("gamma too small: piece " + std::to_string(i) +
                                 " of V_{j-1} has concavity margin " + std::to_string(e));
  }
  auto mp = build_max_problem(spec, Vprev, Xprev, Xnext);
  return ParametricSolver(std::move(mp.problem), explore_options(spec, 0, 1)).explore();
}

ParametricSolution stage_min(const ProblemSpec& spec, const PwqFunction& J, const Polytope& Xprev,
                             const Polytope& Xnext) {
  auto mp = build_min_problem(spec, J, Xprev, Xnext);
  return ParametricSolver(std::move(mp.problem), explore_options(spec, 0, 2)).explore();
}

StageResult boundary_stage(const ProblemSpec& spec) {
  StageResult s;
  s.j = 0;
  s.Xj = window_mode(spec) ? spec.working_window() : spec.Xf;
  s.V.domain = s.Xj;
  s.V.cells = {s.Xj};
  s.V.pieces = {{spec.Pf, VectorXd::Zero(spec.model.n()), 0.0}};
  const auto& g = spec.model;
  s.kappa.domain = s.Xj;
  s.kappa.cells = {s.Xj};
  // No control is applied at time-to-go 0; the terminal gain is reported
  // elsewhere. The law is kept empty-valued of the right shape.
  s.kappa.pieces = {{MatrixXd::Zero(g.m(), g.n()), VectorXd::Zero(g.m())}};
  s.x_regions = s.x_merged = s.x_explored = 1;
  if (spec.mode == DpMode::Restricted) s.XjStar = {spec.Xf};
  return s;
}

bool in_union(const std::vector<Polytope>& sets, const VectorXd& x, double tol) {
  for (const auto& s : sets)
    if (s.contains(x, tol)) return true;
  return false;
}

std::vector<Polytope> restricted_set(const ProblemSpec& spec, const PiecewiseAffineLaw& kappa,
                                     const std::vector<Polytope>& previous) {
  const auto& g = spec.model;
  const auto& tol = spec.tol;
  std::vector<Polytope> eroded;
  for (const auto& T : previous) {
    Polytope e = pontryagin_difference(T, g.G, spec.W, tol);
    if (!e.is_empty()) eroded.push_back(std::move(e));
  }
  std::vector<Polytope> pieces;
  for (int c = 0; c < kappa.size(); ++c) {
    const auto& law = kappa.pieces[c];
    const MatrixXd Acl = g.A + g.B * law.K;
    const VectorXd off = g.B * law.k;
    for (const auto& e : eroded) {
      const Polytope pre = affine_preimage(e, Acl, off, tol);
      Polytope piece = add_rows(kappa.cells[c], pre.H(), pre.h(), tol);
      if (!piece.is_full_dimensional(tol.interior)) continue;
      pieces.push_back(remove_redundancy(piece, tol));
    }
  }
  // Drop pieces contained in another one.
  std::vector<bool> keep(pieces.size(), true);
  for (std::size_t a = 0; a < pieces.size(); ++a) {
    for (std::size_t b = 0; b < pieces.size() && keep[a]; ++b) {
      if (a == b || !keep[b]) continue;
      if (is_subset(pieces[a], pieces[b], tol.feas)) keep[a] = false;
    }
  }
  std::vector<Polytope> out;
  for (std::size_t a = 0; a < pieces.size(); ++a)
    if (keep[a]) out.push_back(std::move(pieces[a]));
  return out;
}

StageChecks check_stage(const ProblemSpec& spec, const StageResult& stage, const PwqFunction& Vprev,
                        std::mt19937_64& rng) {
  StageChecks c;
  c.value_regularity = check_regularity(stage.V, rng, spec.tol, spec.budgets);
  c.value_convexity = check_convexity(stage.V, rng, spec.tol, spec.budgets);
  c.law_gap = law_continuity_gap(stage.kappa, rng, spec.tol, spec.budgets);
  c.concavity_margin = check_concavity_margin(Vprev, spec.model.G, spec.model.gamma);
  c.cost_regularity = check_regularity(stage.J, rng, spec.tol, spec.budgets);
  c.value_partition = check_partition(stage.V.partition(), rng, spec.tol, spec.budgets);
  return c;
}

std::vector<StageResult> run_recursion(const ProblemSpec& spec,
                                       const std::function<void(const StageResult&)>& on_stage) {
  spec.validate();
  std::vector<StageResult> out;
  out.push_back(boundary_stage(spec));
  if (on_stage) on_stage(out.back());
  std::mt19937_64 rng(spec.seed);
  for (int j = 1; j <= spec.N; ++j) {
    const StageResult& prev = out.back();
    StageResult s = with_stage(j, [&] {
      StageResult r;
      r.j = j;
      r.Xj = next_state_set(spec, prev.Xj);
      auto mp = build_max_problem(spec, prev.V, prev.Xj, r.Xj);
      r.Phi = mp.Phi;
      r.Zj = mp.problem.domain;
      auto J = stage_max(spec, prev.V, prev.Xj, r.Xj);
      auto V = stage_min(spec, J.value, prev.Xj, r.Xj);
      r.J = std::move(J.value);
      r.nu = std::move(J.law);
      r.max_stats = J.stats;
      r.z_regions = static_cast<int>(J.regions.size());
      r.z_merged = J.merged_count;
      r.z_explored = J.stats.explored_regions;
      r.feasible_xu = build_min_problem(spec, r.J, prev.Xj, r.Xj).feasible_xu;
      r.V = std::move(V.value);
      r.kappa = std::move(V.law);
      r.min_stats = V.stats;
      r.x_regions = static_cast<int>(V.regions.size());
      r.x_merged = V.merged_count;
      r.x_explored = V.stats.explored_regions;
      if (spec.mode == DpMode::Restricted) r.XjStar = restricted_set(spec, r.kappa, prev.XjStar);
      if (spec.validate_stages) r.checks = check_stage(spec, r, prev.V, rng);
      return r;
    });
    spdlog::info("stage {}: {} x-regions ({} merged), {} z-regions ({} merged)", j, s.x_regions,
                 s.x_merged, s.z_regions, s.z_merged);
    const int overlaps = s.max_stats.overlapping_pairs + s.min_stats.overlapping_pairs;
    if (overlaps > 0)
      spdlog::warn("stage {}: {} overlapping region pairs ({}); the stage objective has "
                   "coexisting local optima",
                   j, overlaps, spec.resolve_overlaps ? "split" : "left in place");
    out.push_back(std::move(s));
    if (on_stage) on_stage(out.back());
  }
  return out;
}

}  // namespace hinfx
