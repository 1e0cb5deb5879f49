#include "hinfx/verify.hpp"

#include <spdlog/fmt/fmt.h>

#include <cmath>
#include <numbers>

#include "hinfx/errors.hpp"

namespace hinfx {

bool SuiteReport::ok() const { return failures() == 0; }

int SuiteReport::failures() const {
  int n = 0;
  for (const auto& l : lines) n += l.pass ? 0 : 1;
  return n;
}

void SuiteReport::add(std::string name, bool pass, double value, std::string detail) {
  lines.push_back({std::move(name), pass, value, std::move(detail)});
}

void SuiteReport::append(const SuiteReport& other) {
  lines.insert(lines.end(), other.lines.begin(), other.lines.end());
}

std::string SuiteReport::text() const {
  std::string out;
  for (const auto& l : lines)
    out += fmt::format("{} {} {:.6g}{}{}\n", l.pass ? "PASS" : "FAIL", l.name, l.value,
                       l.detail.empty() ? "" : " ", l.detail);
  return out;
}

SuiteReport terminal_suite(const GameModel& model, const TerminalPair& pair, const Polytope& X,
                           const Polytope& U, const Polytope& W, std::mt19937_64& rng,
                           const Tolerances& tol) {
  SuiteReport r;
  const double res = verify_fake_hjb(model, pair, rng);
  r.add("terminal.hjb_residual", res <= 1e-8, res, "limit 1e-8");
  const double rf = spectral_radius(pair.Af), rc = spectral_radius(pair.Ac);
  r.add("terminal.rho_Af", rf < 1.0 - 1e-9, rf, "limit 1");
  r.add("terminal.rho_Ac", rc < 1.0 - 1e-9, rc, "limit 1");
  const auto rep = check_terminal_set(model, pair.Ku, pair.Kw, pair.Xf, X, U, W, tol.feas);
  r.add("terminal.invariance", rep.invariance_violations == 0, rep.invariance_violations,
        "vertex pairs outside Xf");
  r.add("terminal.input", rep.input_violations == 0, rep.input_violations, "Ku v outside U");
  r.add("terminal.disturbance", rep.disturbance_violations == 0, rep.disturbance_violations,
        "Kw v outside W");
  r.add("terminal.containment", rep.containment_violations == 0, rep.containment_violations,
        "Xf vertices outside X");
  return r;
}

namespace {

std::vector<VectorXd> directions(int n, int count, std::mt19937_64& rng) {
  std::vector<VectorXd> out;
  if (n == 2) {
    for (int k = 0; k < count; ++k) {
      const double t = 2.0 * std::numbers::pi * k / count;
      out.push_back((VectorXd(2) << std::cos(t), std::sin(t)).finished());
    }
    return out;
  }
  std::normal_distribution<double> nd;
  for (int k = 0; k < count; ++k) {
    VectorXd a(n);
    for (int i = 0; i < n; ++i) a(i) = nd(rng);
    out.push_back(a.normalized());
  }
  return out;
}

// Support of X cap Proj_X Z_{j-1} in direction a, as an LP over (x, u)
// without forming the projection.
double lifted_support(const ProblemSpec& spec, const Polytope& Xprev, const VectorXd& a) {
  const auto& g = spec.model;
  const int n = g.n(), m = g.m();
  const Polytope& X = spec.X;
  const Polytope& U = spec.U;
  const int rows = X.rows() + U.rows() + Xprev.rows();
  MatrixXd H = MatrixXd::Zero(rows, n + m);
  VectorXd h(rows);
  H.topLeftCorner(X.rows(), n) = X.H();
  h.head(X.rows()) = X.h();
  H.block(X.rows(), n, U.rows(), m) = U.H();
  h.segment(X.rows(), U.rows()) = U.h();
  for (int r = 0; r < Xprev.rows(); ++r) {
    const VectorXd row = Xprev.H().row(r).transpose();
    const int i = X.rows() + U.rows() + r;
    H.block(i, 0, 1, n) = (g.A.transpose() * row).transpose();
    H.block(i, n, 1, m) = (g.B.transpose() * row).transpose();
    h(i) = Xprev.h()(r) - support(spec.W, g.G.transpose() * row, spec.tol);
  }
  VectorXd dir = VectorXd::Zero(n + m);
  dir.head(n) = a;
  return support(Polytope(H, h, spec.tol), dir, spec.tol);
}

}  // namespace

SuiteReport stage_suite(const ProblemSpec& spec, const std::vector<StageResult>& stages,
                        const MatrixXd& Ku, std::mt19937_64& rng, const StageSuiteOptions& opt) {
  SuiteReport r;
  const auto& g = spec.model;
  const auto& tol = spec.tol;
  const bool constrained = spec.mode == DpMode::Constrained;
  for (std::size_t j = 1; j < stages.size(); ++j) {
    const StageResult& s = stages[j];
    const StageResult& prev = stages[j - 1];
    const std::string p = fmt::format("stage{}.", s.j);

    const auto reg = check_regularity(s.V, rng, tol, spec.budgets);
    r.add(p + "continuity", reg.continuous(), reg.continuity_violations,
          fmt::format("max relative gap {:.3g}", reg.max_value_gap));
    if (spec.mode == DpMode::ControlOnly || spec.mode == DpMode::Restricted)
      r.add(p + "c1", reg.c1(tol.c1), reg.max_gradient_jump, "max gradient jump, limit 1e-5");
    else
      r.add(p + "gradient_jump", true, reg.max_gradient_jump, "informational");
    const auto cvx = check_convexity(s.V, rng, tol, spec.budgets);
    r.add(p + "convexity", cvx.strictly_convex(tol.pd), cvx.midpoint_violations,
          fmt::format("min eigenvalue {:.6g}", cvx.min_eigenvalue));
    const double gap = law_continuity_gap(s.kappa, rng, tol, spec.budgets);
    r.add(p + "law_continuity", gap <= tol.cont, gap);
    const double margin = check_concavity_margin(prev.V, g.G, g.gamma);
    r.add(p + "concavity_margin", margin > 0.0, margin);
    const auto jcvx = check_convexity(s.J, rng, tol, spec.budgets);
    r.add(p + "cost_convexity", jcvx.convex(), jcvx.midpoint_violations);
    const auto jreg = check_regularity(s.J, rng, tol, spec.budgets);
    r.add(p + "cost_continuity", jreg.continuous(), jreg.continuity_violations);
    const auto part = check_partition(s.V.partition(), rng, tol, spec.budgets);
    r.add(p + "partition", part.ok(), part.overlapping_pairs,
          fmt::format("coverage {:.6g}", part.coverage));

    if (constrained) {
      double worst = 0.0;
      for (const auto& a : directions(g.n(), 32, rng))
        worst = std::max(worst, std::abs(support(s.Xj, a, tol) - lifted_support(spec, prev.Xj, a)));
      r.add(p + "set_recursion", worst <= 1e-8, worst, "support gap in 32 directions");

      int escapes = 0;
      const auto wv = vertices(spec.W, tol);
      for (const auto& v : vertices(s.Xj, tol)) {
        const VectorXd u = evaluate(s.kappa, v, tol.feas);
        for (const auto& w : wv)
          if (!s.Xj.contains(g.step(v, u, w), tol.feas)) ++escapes;
      }
      r.add(p + "robust_invariance", escapes == 0, escapes, "vertex successors outside X_j");

      double mono = -std::numeric_limits<double>::infinity();
      for (const auto& x : sample_uniform(prev.Xj, opt.samples, rng, tol))
        mono = std::max(mono, evaluate(s.V, x, tol.feas) - evaluate(prev.V, x, tol.feas));
      r.add(p + "monotonicity", mono <= opt.monotone_tol, mono, "max V_j - V_{j-1} on X_{j-1}");
    }

    if (spec.mode == DpMode::Restricted) {
      int missing = 0;
      for (const auto& piece : prev.XjStar)
        for (const auto& x : sample_uniform(piece, std::max(1, opt.samples / 10), rng, tol))
          if (!in_union(s.XjStar, x, tol.feas)) ++missing;
      r.add(p + "xstar_nondecreasing", missing == 0, missing, "samples of X*_{j-1} outside X*_j");
      if (j + 1 < stages.size()) {
        double d = 0.0;
        for (int k = 0; k < opt.samples / 2; ++k) {
          const VectorXd x = sample_union(s.XjStar, rng, tol);
          d = std::max(d, std::abs(evaluate(s.V, x, tol.feas) - evaluate(stages[j + 1].V, x, tol.feas)));
        }
        r.add(p + "xstar_stationary", d <= opt.stationary_tol, d, "|V_j - V_{j+1}| on X*_j");
      }
    }
  }

  if (stages.size() > 1 && spec.mode != DpMode::ControlOnly) {
    const StageResult& last = stages.back();
    double dv = 0.0, dk = 0.0;
    for (const auto& x : sample_uniform(spec.Xf, opt.samples, rng, tol)) {
      dv = std::max(dv, std::abs(evaluate(last.V, x, tol.feas) - 0.5 * x.dot(spec.Pf * x)));
      dk = std::max(dk, (evaluate(last.kappa, x, tol.feas) - Ku * x).cwiseAbs().maxCoeff());
    }
    r.add("terminal_consistency.value", dv <= opt.terminal_tol, dv, "max |V_N - V_f| on X_f");
    r.add("terminal_consistency.law", dk <= opt.terminal_tol, dk, "max |kappa_N - Ku x| on X_f");
  }
  return r;
}

SuiteReport oracle_suite(const ProblemSpec& spec, const std::vector<StageResult>& stages,
                         std::mt19937_64& rng, const OracleSuiteOptions& opt) {
  SuiteReport r;
  const auto& g = spec.model;
  const auto& tol = spec.tol;
  for (std::size_t j = 1; j < stages.size(); ++j) {
    const StageResult& s = stages[j];
    const StageResult& prev = stages[j - 1];
    const std::string p = fmt::format("oracle{}.", s.j);
    const StageOracle so{g, spec.U, spec.W, prev.V, prev.Xj, spec.mode == DpMode::Constrained};
    const auto minp = build_min_problem(spec, s.J, prev.Xj, s.Xj);

    double e_grid = 0.0, e_enum = 0.0, e_u = 0.0;
    int bad = 0;
    for (const auto& x : sample_uniform(s.Xj, opt.samples, rng, tol)) {
      const double v = evaluate(s.V, x, tol.feas);
      const VectorXd u = evaluate(s.kappa, x, tol.feas);
      const auto oe = oracle_enumerate(minp.problem, x, opt.config);
      if (!oe.feasible) {
        ++bad;
        continue;
      }
      e_enum = std::max(e_enum, std::abs(v - oe.value));
      e_u = std::max(e_u, (u - oe.optimizer).cwiseAbs().maxCoeff());
      if (g.m() == 1) {
        const auto og = so.min_grid(x, opt.config);
        if (!og.feasible) {
          ++bad;
          continue;
        }
        e_grid = std::max(e_grid, std::abs(v - og.value));
        e_u = std::max(e_u, (u - og.optimizer).cwiseAbs().maxCoeff());
      }
    }
    if (g.m() == 1) r.add(p + "value_grid", e_grid <= opt.grid_tol, e_grid, "limit 1e-5");
    r.add(p + "value_enumeration", e_enum <= opt.enum_tol, e_enum, "limit 1e-7");
    r.add(p + "control", e_u <= opt.optimizer_tol, e_u, "limit 1e-4");
    r.add(p + "infeasible_samples", bad == 0, bad);

    double e_j = 0.0, e_w = 0.0;
    int bad_z = 0;
    for (const auto& z : sample_uniform(s.Zj, opt.samples, rng, tol)) {
      const auto o = so.max_at(z.head(g.n()), z.tail(g.m()), opt.config);
      if (!o.feasible) {
        ++bad_z;
        continue;
      }
      e_j = std::max(e_j, std::abs(evaluate(s.J, z, tol.feas) - o.value));
      e_w = std::max(e_w, (evaluate(s.nu, z, tol.feas) - o.optimizer).cwiseAbs().maxCoeff());
    }
    r.add(p + "cost_enumeration", e_j <= opt.enum_tol, e_j, "limit 1e-7");
    r.add(p + "disturbance", e_w <= opt.optimizer_tol, e_w, "limit 1e-4");
    r.add(p + "infeasible_z_samples", bad_z == 0, bad_z);
  }
  if (stages.size() > 1) {
    const auto L = oracle_lipschitz_U(stages[1].feasible_xu, g.n(), 200, rng, tol);
    r.add("oracle.lipschitz_U", std::isfinite(L.max_ratio), L.max_ratio,
          fmt::format("sampled over {} pairs of Z_0", L.pairs));
  }
  return r;
}

SuiteReport closed_loop_suite(const ProblemSpec& spec, const std::vector<StageResult>& stages,
                              std::mt19937_64& rng, const ClosedLoopOptions& opt) {
  SuiteReport r;
  if (stages.size() < 2) return r;
  const auto& g = spec.model;
  const auto& tol = spec.tol;
  if (spec.mode == DpMode::Restricted) {
    const auto rep = attraction_check(spec, stages, rng);
    r.add("closed_loop.attraction", rep.ok(), rep.failures,
          fmt::format("entered X_f within {} steps", rep.max_steps_to_enter));
    return r;
  }
  if (spec.mode != DpMode::Constrained) return r;

  const ClosedLoop loop = ClosedLoop::from_stages(spec, stages);
  std::uniform_int_distribution<std::uint64_t> seeds;
  int escapes = 0;
  for (int k = 0; k < opt.rollouts; ++k) {
    DisturbanceSource src;
    src.kind = k % 2 ? DisturbanceKind::Worst : DisturbanceKind::Random;
    src.seed = seeds(rng);
    const VectorXd x0 = sample_uniform(loop.XN, 1, rng, tol).front();
    try {
      simulate(loop, x0, src, opt.rollout_steps, tol);
    } catch (const CertificateViolation&) {
      ++escapes;
    }
  }
  r.add("closed_loop.robust_invariance", escapes == 0, escapes,
        fmt::format("escapes over {} rollouts", opt.rollouts));

  double slack = std::numeric_limits<double>::infinity();
  double descent = -std::numeric_limits<double>::infinity();
  double residual = 0.0;
  int unsettled = 0;
  std::uniform_int_distribution<int> length(1, opt.burst_max_length);
  for (int k = 0; k < opt.bursts; ++k) {
    const VectorXd x0 = sample_uniform(loop.XN, 1, rng, tol).front();
    DisturbanceSource burst;
    burst.kind = DisturbanceKind::Sequence;
    burst.sequence = sample_uniform(spec.W, length(rng), rng, tol);
    const Trajectory t = simulate(loop, x0, burst, opt.settle_steps, tol);
    const auto cert = finite_gain_certificate(g, t);
    slack = std::min(slack, cert.slack);
    unsettled += cert.settled ? 0 : 1;
    residual = std::max(residual, t.dynamics_residual(g));
    const Trajectory t0 = simulate(loop, x0, {}, opt.settle_steps, tol);
    descent = std::max(descent, worst_descent(g, t0));
  }
  r.add("closed_loop.finite_gain", slack >= -opt.slack_tol, slack,
        fmt::format("min slack over {} bursts ({} unsettled); {}", opt.bursts, unsettled,
                    GainCertificate::kConvention));
  r.add("closed_loop.descent", descent <= opt.descent_tol, descent,
        "max V(x+) - V(x) + x'Qx/2 + u'Ru/2 with w = 0");
  r.add("closed_loop.dynamics_residual", residual <= 1e-12, residual);
  return r;
}

}  // namespace hinfx
