#include "hinfx/parametric.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <sstream>
#include <limits>
#include <numeric>

#include "hinfx/errors.hpp"
#include "hinfx/optbase.hpp"

namespace hinfx {

namespace {

constexpr double kStrictActivity = 1e-9;
constexpr int kMaxEnumeratedSubsets = 64;
constexpr int kMaxMarriageCombos = 4096;
// Laws of married cells must coincide; coefficients compared entrywise.
constexpr double kLawAgreement = 1e-7;

struct Blocks {
  MatrixXd Hvv, Hvt;
  VectorXd gv;
};

Blocks decision_blocks(const QuadraticForm& piece, int np) {
  const int nd = piece.dim() - np;
  return {piece.Q.bottomRightCorner(nd, nd), piece.Q.bottomLeftCorner(nd, np), piece.q.tail(nd)};
}

double sign_of(Mode m) { return m == Mode::Min ? 1.0 : -1.0; }

bool full_row_rank(const MatrixXd& M, const std::vector<int>& rows) {
  if (rows.empty()) return true;
  MatrixXd S(static_cast<Eigen::Index>(rows.size()), M.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) S.row(static_cast<Eigen::Index>(i)) = M.row(rows[i]);
  Eigen::FullPivLU<MatrixXd> lu(S);
  lu.setThreshold(1e-9);
  return lu.rank() == static_cast<Eigen::Index>(rows.size());
}

// Every subset of `pool` with at most `limit` members, largest first.
std::vector<std::vector<int>> subsets_up_to(const std::vector<int>& pool, int limit) {
  std::vector<std::vector<int>> out;
  const int n = static_cast<int>(pool.size());
  if (n > 20) return out;
  for (int mask = 0; mask < (1 << n); ++mask) {
    if (__builtin_popcount(static_cast<unsigned>(mask)) > limit) continue;
    std::vector<int> s;
    for (int i = 0; i < n; ++i)
      if (mask & (1 << i)) s.push_back(pool[i]);
    out.push_back(std::move(s));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.size() > b.size(); });
  return out;
}

std::string seed_text(const VectorXd& x) {
  std::ostringstream os;
  os << x.transpose();
  return os.str();
}

bool same_law(const AffineLaw& a, const AffineLaw& b, double tol) {
  const double scale = 1.0 + std::max(a.K.cwiseAbs().maxCoeff(), a.k.cwiseAbs().maxCoeff());
  return (a.K - b.K).cwiseAbs().maxCoeff() <= tol * scale &&
         (a.k - b.k).cwiseAbs().maxCoeff() <= tol * scale;
}

// Row r of `joint` repeats a row of `constraint` (both normalized).
bool is_constraint_row(const Polytope& joint, int r, const Polytope& constraint) {
  for (int i = 0; i < constraint.rows(); ++i) {
    if ((joint.H().row(r) - constraint.H().row(i)).cwiseAbs().maxCoeff() <= 1e-9 &&
        std::abs(joint.h()(r) - constraint.h()(i)) <= 1e-9 * (1.0 + std::abs(joint.h()(r))))
      return true;
  }
  return false;
}

}  // namespace

int resolve_overlaps(std::vector<MarriedRegion>& regions, Mode mode, const Tolerances& tol) {
  int pairs = 0;
  const double s = sign_of(mode);
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t a = 0; a < regions.size() && !changed; ++a) {
      for (std::size_t b = a + 1; b < regions.size() && !changed; ++b) {
        const Polytope overlap = add_rows(regions[a].region, regions[b].region.H(),
                                          regions[b].region.h(), tol);
        if (!overlap.is_full_dimensional(tol.interior)) continue;
        ++pairs;
        changed = true;
        // Split the overlap where the two branch values cross, linearized
        // at its center; each side goes to the better branch.
        const VectorXd c = overlap.chebyshev_center();
        const QuadraticForm diff = regions[a].value + (-regions[b].value);
        VectorXd g = s * diff.gradient(c);
        double d0 = s * diff(c);
        if (g.norm() <= 1e-12) g = VectorXd::Unit(c.size(), 0), d0 = d0 > 0 ? -1.0 : 1.0;
        // a keeps {s*diff_lin <= 0}; b keeps {s*diff_lin >= 0}.
        const double off = g.dot(c) - d0;
        const Polytope give_b = add_rows(overlap, -g.transpose(), VectorXd::Constant(1, -off), tol);
        const Polytope give_a = add_rows(overlap, g.transpose(), VectorXd::Constant(1, off), tol);
        auto carve = [&](const MarriedRegion& r, const Polytope& lost) {
          std::vector<MarriedRegion> out;
          for (auto& piece : set_difference(r.region, lost, tol)) {
            MarriedRegion m = r;
            m.region = std::move(piece);
            out.push_back(std::move(m));
          }
          return out;
        };
        auto pa = carve(regions[a], give_b);
        auto pb = carve(regions[b], give_a);
        std::vector<MarriedRegion> next;
        for (std::size_t k = 0; k < regions.size(); ++k)
          if (k != a && k != b) next.push_back(std::move(regions[k]));
        for (auto& r : pa) next.push_back(std::move(r));
        for (auto& r : pb) next.push_back(std::move(r));
        regions = std::move(next);
      }
    }
  }
  return pairs;
}

PieceConstraintForm split_constraints(const Polytope& joint, int param_dim, double tol) {
  const int n = joint.dim();
  if (param_dim < 0 || param_dim > n) throw InputError("split_constraints: bad parameter dimension");
  PieceConstraintForm f;
  f.M = joint.H().rightCols(n - param_dim);
  f.N = -joint.H().leftCols(param_dim);
  f.p = joint.h();
  for (int i = 0; i < joint.rows(); ++i) {
    if (f.M.row(i).norm() <= tol)
      f.parameter_rows.push_back(i);
    else
      f.decision_rows.push_back(i);
  }
  return f;
}

EqualityQpSolution solve_equality_qp_parametric(const QuadraticForm& piece,
                                                const PieceConstraintForm& form,
                                                const std::vector<int>& I, int param_dim,
                                                Mode mode, const Tolerances& tol) {
  const int np = param_dim;
  const int nd = piece.dim() - np;
  const int k = static_cast<int>(I.size());
  const double s = sign_of(mode);
  if (!full_row_rank(form.M, I)) throw DegenerateActiveSetError("active rows are linearly dependent");
  auto b = decision_blocks(piece, np);
  const MatrixXd Hvv = s * b.Hvv;
  if (Eigen::SelfAdjointEigenSolver<MatrixXd>(0.5 * (Hvv + Hvv.transpose())).eigenvalues()(0) <=
      tol.pd)
    throw ModeError(mode == Mode::Min ? "objective is not strictly convex in the decision"
                                      : "objective is not strictly concave in the decision");

  MatrixXd KKT = MatrixXd::Zero(nd + k, nd + k);
  KKT.topLeftCorner(nd, nd) = Hvv;
  MatrixXd rhs_lin = MatrixXd::Zero(nd + k, np);
  VectorXd rhs_const = VectorXd::Zero(nd + k);
  rhs_lin.topRows(nd) = -s * b.Hvt;
  rhs_const.head(nd) = -s * b.gv;
  for (int j = 0; j < k; ++j) {
    KKT.block(0, nd + j, nd, 1) = form.M.row(I[j]).transpose();
    KKT.block(nd + j, 0, 1, nd) = form.M.row(I[j]);
    rhs_lin.row(nd + j) = form.N.row(I[j]);
    rhs_const(nd + j) = form.p(I[j]);
  }
  Eigen::FullPivLU<MatrixXd> lu(KKT);
  if (lu.rank() < nd + k) throw DegenerateActiveSetError("singular KKT system");
  const MatrixXd sol_lin = lu.solve(rhs_lin);
  const VectorXd sol_const = lu.solve(rhs_const);

  EqualityQpSolution out;
  out.law = {sol_lin.topRows(nd), sol_const.head(nd)};
  out.multipliers = {sol_lin.bottomRows(k), sol_const.tail(k)};
  MatrixXd lift(np + nd, np);
  lift << MatrixXd::Identity(np, np), out.law.K;
  VectorXd shift(np + nd);
  shift << VectorXd::Zero(np), out.law.k;
  out.value = piece.compose(lift, shift);
  return out;
}

CriticalRegion build_critical_region(int cell, const std::vector<int>& I,
                                     const PieceConstraintForm& form,
                                     const EqualityQpSolution& eq, const Polytope& domain,
                                     const Tolerances& tol) {
  const int np = domain.dim();
  std::vector<bool> in_I(form.rows(), false);
  for (int i : I) in_I[i] = true;
  const int k = static_cast<int>(I.size());
  const int total = static_cast<int>(form.rows()) + k + domain.rows();
  MatrixXd H(total, np);
  VectorXd h(total);
  int r = 0;
  for (int j : form.decision_rows) {
    if (in_I[j]) continue;
    H.row(r) = form.M.row(j) * eq.law.K - form.N.row(j);
    h(r) = form.p(j) - form.M.row(j).dot(eq.law.k);
    ++r;
  }
  for (int j = 0; j < k; ++j) {
    H.row(r) = -eq.multipliers.K.row(j);
    h(r) = eq.multipliers.k(j);
    ++r;
  }
  for (int j : form.parameter_rows) {
    H.row(r) = -form.N.row(j);
    h(r) = form.p(j);
    ++r;
  }
  H.middleRows(r, domain.rows()) = domain.H();
  h.segment(r, domain.rows()) = domain.h();
  r += domain.rows();
  Polytope region(H.topRows(r), h.head(r), tol);
  CriticalRegion cr;
  cr.cell = cell;
  cr.active = I;
  cr.region = region.is_empty() ? region : remove_redundancy(region, tol);
  cr.law = eq.law;
  cr.value = eq.value;
  cr.multipliers = eq.multipliers;
  return cr;
}

ParametricSolver::ParametricSolver(ParametricProblem problem, ExploreOptions options)
    : problem_(std::move(problem)), options_(options) {
  const auto& p = problem_;
  if (p.objective.size() == 0) throw InputError("parametric problem has no objective pieces");
  if (p.constraint.dim() != p.objective.dim())
    throw InputError("constraint and objective live in different spaces");
  if (p.domain.dim() != p.param_dim) throw InputError("domain dimension differs from parameter");
  if (p.decision_dim() < 1) throw InputError("parametric problem has no decision variable");
  const auto& tol = options_.tol;
  const double s = sign_of(p.mode);
  for (int i = 0; i < p.objective.size(); ++i) {
    Polytope joint = add_rows(p.objective.cells[i], p.constraint.H(), p.constraint.h(), tol);
    const bool ok = joint.is_full_dimensional(tol.interior);
    if (ok) joint = remove_redundancy(joint, tol);
    joint_cells_.push_back(joint);
    forms_.push_back(split_constraints(joint, p.param_dim));
    std::vector<bool> boundary(joint.rows());
    for (int r = 0; r < joint.rows(); ++r) boundary[r] = !is_constraint_row(joint, r, p.constraint);
    boundary_rows_.push_back(std::move(boundary));
    usable_.push_back(ok);
    if (!ok) continue;
    const MatrixXd Hvv = s * decision_blocks(p.objective.pieces[i], p.param_dim).Hvv;
    const double e =
        Eigen::SelfAdjointEigenSolver<MatrixXd>(0.5 * (Hvv + Hvv.transpose())).eigenvalues()(0);
    if (e <= tol.pd)
      throw ModeError("piece " + std::to_string(i) +
                      (p.mode == Mode::Min ? " is not strictly convex in the decision"
                                           : " is not strictly concave in the decision"));
  }
  if (options_.check_preconditions && p.mode == Mode::Min &&
      p.objective.domain.is_full_dimensional(tol.interior)) {
    std::mt19937_64 rng(options_.seed);
    auto rep = check_convexity(p.objective, rng, tol, options_.budgets);
    if (!rep.convex())
      throw ModeError("objective fails the convexity check (" +
                      std::to_string(rep.midpoint_violations) + " midpoint violations)");
  }
}

PointwiseSolution ParametricSolver::pointwise(const VectorXd& theta, double activity) const {
  const auto& p = problem_;
  const int np = p.param_dim;
  const double s = sign_of(p.mode);
  const auto& tol = options_.tol;
  if (theta.size() != np) throw InputError("pointwise: parameter has the wrong dimension");

  double best = std::numeric_limits<double>::infinity();
  int best_cell = -1;
  VectorXd best_v;
  for (int i = 0; i < cells(); ++i) {
    if (!usable_[i]) continue;
    const auto& f = forms_[i];
    bool param_ok = true;
    for (int j : f.parameter_rows)
      if (f.N.row(j).dot(theta) + f.p(j) < -tol.feas * (1.0 + std::abs(f.p(j)))) param_ok = false;
    if (!param_ok) continue;
    auto b = decision_blocks(p.objective.pieces[i], np);
    QpProblem qp;
    qp.hessian = s * b.Hvv;
    qp.linear = s * (b.Hvt * theta + b.gv);
    const int m = static_cast<int>(f.decision_rows.size());
    qp.Ain.resize(m, p.decision_dim());
    qp.bin.resize(m);
    for (int r = 0; r < m; ++r) {
      const int j = f.decision_rows[r];
      qp.Ain.row(r) = f.M.row(j);
      qp.bin(r) = f.N.row(j).dot(theta) + f.p(j);
    }
    qp.Aeq = MatrixXd(0, p.decision_dim());
    qp.beq = VectorXd(0);
    Solution sol = solve_qp(qp, tol);
    if (!sol.optimal()) continue;
    VectorXd z(p.objective.dim());
    z << theta, sol.x;
    const double val = s * p.objective.pieces[i](z);
    if (best_cell < 0 || val < best - 1e-12 * (1.0 + std::abs(best))) {
      best = val;
      best_cell = i;
      best_v = sol.x;
    }
  }
  if (best_cell < 0) throw InfeasibleError("no cell is feasible at this parameter");

  PointwiseSolution out;
  out.optimizer = best_v;
  VectorXd z(p.objective.dim());
  z << theta, best_v;
  out.value = p.objective.pieces[best_cell](z);
  auto add_cell = [&](int i) {
    const auto& f = forms_[i];
    std::vector<int> act;
    for (int j : f.decision_rows) {
      const double rhs = f.N.row(j).dot(theta) + f.p(j);
      const double slack = rhs - f.M.row(j).dot(best_v);
      if (std::abs(slack) <= activity * (1.0 + std::abs(rhs))) act.push_back(j);
    }
    out.cells.push_back(i);
    out.active.push_back(std::move(act));
  };
  add_cell(best_cell);
  for (int i = 0; i < cells(); ++i) {
    if (i == best_cell || !usable_[i]) continue;
    const Polytope& c = joint_cells_[i];
    const VectorXd slack = c.h() - c.H() * z;
    bool inside = true;
    for (int r = 0; r < c.rows() && inside; ++r)
      inside = slack(r) >= -activity * (1.0 + std::abs(c.h()(r)));
    if (inside) add_cell(i);
  }
  return out;
}

std::optional<MarriedRegion> ParametricSolver::marry(const VectorXd& theta,
                                                     const PointwiseSolution& pw,
                                                     bool enumerate) const {
  const auto& p = problem_;
  const auto& tol = options_.tol;
  const int nd = p.decision_dim();

  auto region_for = [&](int cell, const std::vector<int>& I) -> std::optional<CriticalRegion> {
    try {
      auto eq = solve_equality_qp_parametric(p.objective.pieces[cell], forms_[cell], I,
                                             p.param_dim, p.mode, tol);
      return build_critical_region(cell, I, forms_[cell], eq, p.domain, tol);
    } catch (const DegenerateActiveSetError&) {
      return std::nullopt;
    }
  };
  auto good = [&](const Polytope& r) {
    return r.is_full_dimensional(tol.interior) && r.contains(theta, tol.feas);
  };

  // Candidate critical regions per cell, most specific active set first.
  std::vector<std::vector<CriticalRegion>> options(pw.cells.size());
  for (std::size_t c = 0; c < pw.cells.size(); ++c) {
    const int cell = pw.cells[c];
    const auto& eps = pw.active[c];
    std::vector<int> I = eps;
    if (static_cast<int>(I.size()) > nd || !full_row_rank(forms_[cell].M, I))
      I = independent_rows(forms_[cell].M, eps);
    if (auto cr = region_for(cell, I); cr && (!enumerate || good(cr->region)))
      options[c].push_back(std::move(*cr));
    if (enumerate) {
      int tried = 0;
      for (const auto& sub : subsets_up_to(eps, nd)) {
        if (sub == I) continue;
        if (++tried > kMaxEnumeratedSubsets) break;
        if (!full_row_rank(forms_[cell].M, sub)) continue;
        if (auto cr = region_for(cell, sub); cr && good(cr->region)) options[c].push_back(std::move(*cr));
      }
    }
    if (options[c].empty()) return std::nullopt;
  }

  // Pick one candidate per cell so that all laws coincide and the common
  // region is full-dimensional around theta.
  std::vector<int> pick(options.size(), 0);
  std::optional<Polytope> found;
  int combos = 0;
  std::function<bool(std::size_t, const MatrixXd&, const VectorXd&)> search =
      [&](std::size_t c, const MatrixXd& H, const VectorXd& h) -> bool {
    if (c == options.size()) {
      Polytope region(H, h, tol);
      if (!good(region)) return false;
      found = std::move(region);
      return true;
    }
    for (std::size_t k = 0; k < options[c].size(); ++k) {
      if (++combos > kMaxMarriageCombos) return false;
      const auto& cr = options[c][k];
      if (c > 0 && !same_law(cr.law, options[0][pick[0]].law, kLawAgreement)) continue;
      MatrixXd H2(H.rows() + cr.region.rows(), H.cols());
      VectorXd h2(h.size() + cr.region.rows());
      H2 << H, cr.region.H();
      h2 << h, cr.region.h();
      // Prune early: the partial intersection must already contain theta.
      if (!Polytope(H2, h2, tol).is_full_dimensional(tol.interior)) continue;
      pick[c] = static_cast<int>(k);
      if (search(c + 1, H2, h2)) return true;
    }
    return false;
  };
  if (!search(0, p.domain.H(), p.domain.h())) return std::nullopt;

  MarriedRegion m;
  m.seed = theta;
  m.cells = pw.cells;
  for (std::size_t c = 0; c < options.size(); ++c) m.active.push_back(options[c][pick[c]].active);
  m.region = remove_redundancy(*found, tol);
  m.law = options[0][pick[0]].law;
  m.value = options[0][pick[0]].value;
  return m;
}

std::optional<MarriedRegion> ParametricSolver::region_at(const VectorXd& theta) const {
  PointwiseSolution strict;
  try {
    strict = pointwise(theta, kStrictActivity);
  } catch (const InfeasibleError&) {
    return std::nullopt;
  }
  if (auto m = marry(theta, strict, false)) return m;
  auto loose = pointwise(theta, options_.tol.act);
  if (auto m = marry(theta, loose, true)) return m;
  // Drop weakly active cells and retry with the optimizer's own cell only.
  // Valid only if no row shared with another cell is active: otherwise the
  // neighbor's optimum is the true one on part of the region.
  if (strict.cells.size() > 1) {
    PointwiseSolution single = strict;
    single.cells.resize(1);
    single.active.resize(1);
    if (auto m = marry(theta, single, true)) {
      const auto& rows = boundary_rows_[m->cells.front()];
      const auto& act = m->active.front();
      if (std::none_of(act.begin(), act.end(), [&](int r) { return rows[r]; })) return m;
    }
  }
  return std::nullopt;
}

ParametricSolution ParametricSolver::explore() const {
  const auto& p = problem_;
  const auto& tol = options_.tol;
  const auto& budgets = options_.budgets;
  if (!p.domain.is_full_dimensional(tol.interior))
    throw InfeasibleError("parameter domain has empty interior");

  std::mt19937_64 rng(options_.seed);
  ExploreStats stats;
  std::vector<MarriedRegion> regions;
  std::vector<std::vector<VectorXd>> region_vertices;
  std::deque<std::pair<int, int>> tasks;
  std::vector<VectorXd> tried;

  auto already_tried = [&](const VectorXd& x) {
    for (const auto& t : tried)
      if ((t - x).cwiseAbs().maxCoeff() <= 1e-12) return true;
    return false;
  };
  auto covered = [&](const VectorXd& x) {
    for (const auto& r : regions)
      if (r.region.contains(x, 0.0)) return true;
    return false;
  };

  // Returns true when a new region was stored.
  auto try_seed = [&](const VectorXd& theta) {
    tried.push_back(theta);
    ++stats.seeds;
    auto m = region_at(theta);
    if (!m) {
      ++stats.failed_seeds;
      spdlog::debug("explore: no region at seed {}", seed_text(theta));
      return false;
    }
    for (const auto& r : regions) {
      if (same_rows(r.region, m->region, tol.dedup)) {
        ++stats.duplicate_regions;
        return false;
      }
    }
    if (static_cast<int>(regions.size()) >= budgets.max_regions)
      throw Error("explore: region budget exhausted");
    const int idx = static_cast<int>(regions.size());
    for (int f = 0; f < m->region.rows(); ++f) tasks.emplace_back(idx, f);
    region_vertices.push_back(p.param_dim <= 4 ? vertices(m->region, tol) : std::vector<VectorXd>{});
    regions.push_back(std::move(*m));
    return true;
  };

  auto reaches_across = [&](int q, const FacetPiece& f) {
    if (!region_vertices[q].empty()) {
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      for (const auto& v : region_vertices[q]) {
        const double t = f.a.dot(v);
        lo = std::min(lo, t);
        hi = std::max(hi, t);
      }
      return hi > f.b + tol.interior && lo <= f.b + 1e-7;
    }
    return support(regions[q].region, f.a, tol) > f.b + tol.interior;
  };

  auto run_tasks = [&]() {
    while (!tasks.empty()) {
      if (++stats.facet_tasks > budgets.max_facet_tasks) throw Error("explore: facet task budget exhausted");
      auto [ri, row] = tasks.front();
      tasks.pop_front();
      std::vector<FacetPiece> pieces{facet_of(regions[ri].region, row)};
      for (int q = 0; q < static_cast<int>(regions.size()) && !pieces.empty(); ++q) {
        if (q == ri || !reaches_across(q, pieces.front())) continue;
        std::vector<FacetPiece> next;
        for (const auto& pc : pieces) {
          auto rest = facet_difference(pc, regions[q].region, tol);
          next.insert(next.end(), rest.begin(), rest.end());
        }
        pieces = std::move(next);
      }
      bool grew = false;
      for (const auto& pc : pieces) {
        auto [c, rad] = facet_chebyshev(pc, tol);
        if (rad < tol.interior) continue;
        const VectorXd seed = c + tol.step * pc.a;
        if (!p.domain.contains(seed, 0.0) || covered(seed) || already_tried(seed)) continue;
        grew = try_seed(seed) || grew;
      }
      if (grew) tasks.emplace_back(ri, row);
    }
  };

  try_seed(p.domain.chebyshev_center());
  run_tasks();

  // Monte-Carlo sweep for pockets the facet walk missed.
  for (int restart = 0; restart <= budgets.max_coverage_restarts; ++restart) {
    auto pts = sample_uniform(p.domain, budgets.coverage_samples, rng, tol);
    MatrixXd cloud(p.param_dim, static_cast<Eigen::Index>(pts.size()));
    for (std::size_t k = 0; k < pts.size(); ++k) cloud.col(static_cast<Eigen::Index>(k)) = pts[k];
    std::vector<Polytope> polys;
    for (const auto& r : regions) polys.push_back(r.region);
    auto cov = covered_by_any(polys, cloud, tol.feas);
    const auto missing = std::count(cov.begin(), cov.end(), false);
    stats.uncovered_fraction = pts.empty() ? 0.0 : static_cast<double>(missing) / pts.size();
    if (missing == 0) break;
    bool grew = false;
    int attempts = 0;
    for (std::size_t k = 0; k < pts.size() && !grew && attempts < 20; ++k) {
      if (cov[k] || already_tried(pts[k])) continue;
      ++attempts;
      grew = try_seed(pts[k]);
    }
    if (!grew) break;
    ++stats.coverage_restarts;
    run_tasks();
  }

  stats.explored_regions = static_cast<int>(regions.size());
  if (options_.resolve_overlaps) {
    stats.overlapping_pairs = resolve_overlaps(regions, p.mode, tol);
  } else {
    for (std::size_t a = 0; a < regions.size(); ++a)
      for (std::size_t b = a + 1; b < regions.size(); ++b)
        if (add_rows(regions[a].region, regions[b].region.H(), regions[b].region.h(), tol)
                .is_full_dimensional(tol.interior))
          ++stats.overlapping_pairs;
  }

  std::vector<int> order(regions.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return canonical_less(regions[a].region, regions[b].region);
  });
  ParametricSolution sol;
  sol.domain = p.domain;
  sol.value.domain = p.domain;
  sol.law.domain = p.domain;
  for (int i : order) {
    sol.regions.push_back(regions[i]);
    sol.value.cells.push_back(regions[i].region);
    sol.value.pieces.push_back(regions[i].value);
    sol.law.cells.push_back(regions[i].region);
    sol.law.pieces.push_back(regions[i].law);
  }
  sol.stats = stats;

  // Connected components of "adjacent with the same law".
  const int n = static_cast<int>(sol.regions.size());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
  for (const auto& adj : adjacent_cells(sol.value.cells, tol))
    if (same_law(sol.law.pieces[adj.first], sol.law.pieces[adj.second], 1e-8))
      parent[find(adj.first)] = find(adj.second);
  int comps = 0;
  for (int i = 0; i < n; ++i) comps += find(i) == i ? 1 : 0;
  sol.merged_count = comps;

  spdlog::debug("explore: {} regions ({} merged), {} seeds, {} failed, uncovered {:.2e}", n, comps,
                stats.seeds, stats.failed_seeds, stats.uncovered_fraction);
  return sol;
}

PointwiseSolution pointwise_minmax(const ParametricProblem& problem, const VectorXd& theta,
                                   const Tolerances& tol) {
  ExploreOptions opt;
  opt.tol = tol;
  opt.check_preconditions = false;
  return ParametricSolver(problem, opt).pointwise(theta, tol.act);
}

ParametricSolution explore(const ParametricProblem& problem, const ExploreOptions& options) {
  return ParametricSolver(problem, options).explore();
}

}  // namespace hinfx
