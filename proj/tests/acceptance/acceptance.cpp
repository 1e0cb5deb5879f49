// End-to-end acceptance run on the second-order example. Prints one
// PASS/FAIL line per criterion, with indented detail lines underneath, and
// exits nonzero if any criterion fails.

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <cstdio>
#include <random>

#include "brute.hpp"
#include "example_data.hpp"
#include "hinfx/optbase.hpp"
#include "hinfx/verify.hpp"

using namespace hinfx;

namespace {

int g_failures = 0;

void verdict(int id, const std::string& title, bool pass, const std::string& summary) {
  if (!pass) ++g_failures;
  fmt::print("{} {} {}: {}\n", pass ? "PASS" : "FAIL", id, title, summary);
}

void info(const std::string& line) { fmt::print("    {}\n", line); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

GameModel example_model() {
  return {example::A(), example::B(), example::G(), example::Q(), example::R(), example::kGamma};
}

ProblemSpec example_problem(const MatrixXd& Pf, const Polytope& Xf, int N, DpMode mode,
                            bool resolve) {
  ProblemSpec s;
  s.model = example_model();
  s.X = example::X();
  s.U = example::U();
  s.W = example::W();
  s.Pf = Pf;
  s.Xf = Xf;
  s.N = N;
  s.mode = mode;
  s.resolve_overlaps = resolve;
  s.validate();
  return s;
}

const CheckLine* find(const SuiteReport& r, const std::string& name) {
  for (const auto& l : r.lines)
    if (l.name == name) return &l;
  return nullptr;
}

// Worst value and pass state over every line whose name ends in `suffix`.
struct Aggregate {
  bool pass = true;
  double worst = 0.0;
  int lines = 0;
};

Aggregate collect(const SuiteReport& r, const std::string& suffix) {
  Aggregate a;
  for (const auto& l : r.lines) {
    if (l.name.size() < suffix.size() ||
        l.name.compare(l.name.size() - suffix.size(), suffix.size(), suffix) != 0)
      continue;
    a.pass = a.pass && l.pass;
    a.worst = a.lines == 0 ? l.value : std::max(a.worst, l.value);
    ++a.lines;
  }
  a.pass = a.pass && a.lines > 0;
  return a;
}

void print_failures(const SuiteReport& r) {
  for (const auto& l : r.lines)
    if (!l.pass) info(fmt::format("failed check {} {:.6g} {}", l.name, l.value, l.detail));
}

// ---------------------------------------------------------------------------
// Geometry property suite on random instances.

Polytope random_polytope(int dim, int facets, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_real_distribution<double> off(0.5, 1.5);
  MatrixXd H(facets + 2 * dim, dim);
  VectorXd h(facets + 2 * dim);
  for (int i = 0; i < facets; ++i) {
    for (int j = 0; j < dim; ++j) H(i, j) = nd(rng);
    h(i) = off(rng) * H.row(i).norm();
  }
  H.bottomRows(2 * dim) << MatrixXd::Identity(dim, dim), -MatrixXd::Identity(dim, dim);
  h.tail(2 * dim).setConstant(2.0);
  return Polytope(H, h);
}

struct GeometryTally {
  int instances = 0;
  int erosion_pairs = 0, erosion_violations = 0;
  int lifts = 0, lift_violations = 0;
  int hull_checks = 0, hull_violations = 0;
  int membership_points = 0, membership_mismatches = 0;
  int partitions = 0, partition_violations = 0;
  int total() const {
    return erosion_violations + lift_violations + hull_violations + membership_mismatches +
           partition_violations;
  }
};

// Largest ball radius in the fiber of p above the point c of the kept coordinates.
double fiber_radius(const Polytope& p, const std::vector<int>& keep, const VectorXd& c) {
  const int d = p.dim();
  std::vector<int> rest;
  for (int i = 0; i < d; ++i)
    if (std::find(keep.begin(), keep.end(), i) == keep.end()) rest.push_back(i);
  const int r = static_cast<int>(rest.size());
  LpProblem lp;
  lp.cost = VectorXd::Zero(r + 1);
  lp.cost(r) = -1.0;
  lp.Ain = MatrixXd::Zero(p.rows() + 1, r + 1);
  lp.bin = VectorXd::Zero(p.rows() + 1);
  for (int i = 0; i < p.rows(); ++i) {
    double fixed = 0.0;
    for (std::size_t k = 0; k < keep.size(); ++k) fixed += p.H()(i, keep[k]) * c(k);
    for (int k = 0; k < r; ++k) lp.Ain(i, k) = p.H()(i, rest[k]);
    lp.Ain(i, r) = lp.Ain.row(i).head(r).norm();
    lp.bin(i) = p.h()(i) - fixed;
  }
  lp.Ain(p.rows(), r) = 1.0;
  lp.bin(p.rows()) = 1.0;
  lp.Aeq = MatrixXd::Zero(0, r + 1);
  lp.beq = VectorXd::Zero(0);
  const auto s = solve_lp(lp);
  return s.optimal() ? s.x(r) : -1.0;
}

void geometry_instance(int dim, std::mt19937_64& rng, GeometryTally& t) {
  std::uniform_int_distribution<int> facets(dim, 3 * dim);
  std::uniform_real_distribution<double> ud(-1.0, 1.0);
  ++t.instances;

  // Erosion followed by the sum stays inside the original set.
  const Polytope X = random_polytope(dim, facets(rng), rng);
  MatrixXd G(dim, dim);
  for (int i = 0; i < G.size(); ++i) G(i) = 0.2 * ud(rng);
  const Polytope W = random_polytope(dim, facets(rng), rng);
  const Polytope E = pontryagin_difference(X, 0.3 * G, W);
  if (!E.is_empty()) {
    const auto wv = brute::vertices(W.H(), W.h());
    for (const auto& v : sample_uniform(E, 10, rng)) {
      for (const auto& w : wv) {
        ++t.erosion_pairs;
        if (X.max_violation(v + 0.3 * G * w) > 1e-8) ++t.erosion_violations;
      }
    }
  }

  // Projection: centers lift, and the shadow equals the hull of projected vertices.
  const Polytope P = random_polytope(dim, facets(rng), rng);
  std::vector<int> keep;
  for (int i = 0; i < dim - 1; ++i) keep.push_back(i);
  if (dim > 2) keep.resize(2);
  const Polytope S = project(P, keep);
  ++t.lifts;
  if (!(fiber_radius(P, keep, S.chebyshev_center()) > 1e-9)) ++t.lift_violations;
  std::vector<VectorXd> shadow;
  for (const auto& v : brute::vertices(P.H(), P.h())) {
    VectorXd s(keep.size());
    for (std::size_t k = 0; k < keep.size(); ++k) s(k) = v(keep[k]);
    shadow.push_back(s);
  }
  if (keep.size() == 1) {
    double lo = shadow.front()(0), hi = lo;
    for (const auto& s : shadow) lo = std::min(lo, s(0)), hi = std::max(hi, s(0));
    const auto [slo, shi] = bounding_box(S);
    ++t.hull_checks;
    if (std::abs(slo(0) - lo) > 1e-8 || std::abs(shi(0) - hi) > 1e-8) ++t.hull_violations;
  } else {
    const auto hull = brute::hull_2d(shadow);
    for (const auto& v : hull) {
      ++t.hull_checks;
      if (S.max_violation(v) > 1e-8) ++t.hull_violations;
    }
    for (const auto& v : brute::vertices(S.H(), S.h())) {
      ++t.hull_checks;
      if (brute::hull_violation(hull, v) > 1e-8) ++t.hull_violations;
    }
  }

  // Redundancy removal keeps membership, with dominated copies added.
  MatrixXd H2(P.rows() * 2, dim);
  VectorXd h2(P.rows() * 2);
  std::uniform_real_distribution<double> slack(0.0, 0.5);
  H2 << P.H(), P.H();
  for (int i = 0; i < P.rows(); ++i) h2(P.rows() + i) = P.h()(i) + slack(rng);
  h2.head(P.rows()) = P.h();
  const Polytope Pd(H2, h2);
  const Polytope R = remove_redundancy(Pd);
  const auto [lo, hi] = bounding_box(P);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    VectorXd x(dim);
    for (int i = 0; i < dim; ++i) x(i) = lo(i) - 0.2 + (hi(i) - lo(i) + 0.4) * unit(rng);
    ++t.membership_points;
    if (Pd.contains(x, 1e-8) != R.contains(x, 1e-8)) ++t.membership_mismatches;
  }

  // Difference pieces plus the intersection partition the first set.
  const Polytope Q = random_polytope(dim, facets(rng), rng);
  Partition part{P, set_difference(P, Q)};
  const Polytope PQ = intersect(P, Q);
  if (PQ.is_full_dimensional()) part.cells.push_back(PQ);
  ++t.partitions;
  Budgets budgets;
  budgets.coverage_samples = 1000;
  if (!check_partition(part, rng, {}, budgets).ok()) ++t.partition_violations;
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::err);
  std::mt19937_64 rng(2024);
  const GameModel model = example_model();
  const auto t_all = std::chrono::steady_clock::now();

  // The Riccati pair and terminal set used by criteria 3, 6 and 7.
  const TerminalPair pair = synthesize_terminal(model, example::X(), example::U(), example::W());
  const Polytope Xf_ref = example::Xf_ref();
  const MatrixXd Pf_ref = example::Pf_ref();

  // 1. Partition counts with the rounded reference terminal data.
  {
    const auto t0 = std::chrono::steady_clock::now();
    const auto plain =
        run_recursion(example_problem(Pf_ref, Xf_ref, 2, DpMode::Constrained, false));
    const double secs = seconds_since(t0);
    const auto resolved =
        run_recursion(example_problem(Pf_ref, Xf_ref, 2, DpMode::Constrained, true));
    const auto computed =
        run_recursion(example_problem(pair.P, pair.Xf, 2, DpMode::Constrained, false));
    const auto& p2 = plain[2];
    const bool pass = p2.x_regions == 17 && p2.z_regions == 5;
    verdict(1, "partition counts", pass,
            fmt::format("x-regions {} (expected 17), z-regions {} (expected 5), {:.2f} s",
                        p2.x_regions, p2.z_regions, secs));
    info(fmt::format("after merging equal laws: x-regions {}, z-regions {}", p2.x_merged,
                     p2.z_merged));
    info(fmt::format("overlapping region pairs left in place: {}",
                     p2.max_stats.overlapping_pairs + p2.min_stats.overlapping_pairs));
    info(fmt::format("with overlaps split (default): x-regions {}, z-regions {}",
                     resolved[2].x_regions, resolved[2].z_regions));
    info(fmt::format("computed terminal pair, overlaps left in place: x-regions {}, z-regions {}",
                     computed[2].x_regions, computed[2].z_regions));
  }

  // 2. Riccati solution.
  {
    const auto t0 = std::chrono::steady_clock::now();
    const auto sol = solve_hinf_riccati(model);
    const double secs = seconds_since(t0);
    TerminalPair tp = pair;
    tp.P = sol.P;
    tp.Ku = sol.Ku;
    tp.Kw = sol.Kw;
    std::mt19937_64 r2(7);
    const double res = verify_fake_hjb(model, tp, r2, 100);
    const double dev = (sol.P - Pf_ref).cwiseAbs().maxCoeff();
    verdict(2, "Riccati solution", dev <= 5e-4 && res <= 1e-8 && secs < 1.0,
            fmt::format("max entry deviation {:.3g} (limit 5e-4), residual {:.3g} (limit 1e-8), "
                        "{:.3f} s",
                        dev, res, secs));
    info(fmt::format("P = [{:.6f} {:.6f}; {:.6f} {:.6f}], {} iterations", sol.P(0, 0), sol.P(0, 1),
                     sol.P(1, 0), sol.P(1, 1), sol.iterations));
  }

  // The default run: computed pair, overlaps split.
  const ProblemSpec spec = example_problem(pair.P, pair.Xf, 2, DpMode::Constrained, true);
  const auto stages = run_recursion(spec);
  StageSuiteOptions so;
  so.samples = 100;
  const SuiteReport stage_rep = stage_suite(spec, stages, pair.Ku, rng, so);

  // 3. Terminal consistency.
  {
    const auto* v = find(stage_rep, "terminal_consistency.value");
    const auto* k = find(stage_rep, "terminal_consistency.law");
    verdict(3, "terminal consistency", v && k && v->pass && k->pass,
            fmt::format("max |V_2 - V_f| {:.3g}, max |kappa_2 - Ku x| {:.3g} on 100 samples of "
                        "X_f (limit 1e-6)",
                        v ? v->value : -1.0, k ? k->value : -1.0));
    const ProblemSpec rounded = example_problem(Pf_ref, Xf_ref, 2, DpMode::Constrained, true);
    const auto pst = run_recursion(rounded);
    const auto prep = stage_suite(rounded, pst, pair.Ku, rng, so);
    const auto* pv = find(prep, "terminal_consistency.value");
    info(fmt::format("with the 4-decimal reference P_f the value gap is {:.3g}", pv ? pv->value : -1.0));
  }

  // 4. Oracle equivalence.
  {
    OracleSuiteOptions oo;
    oo.samples = 50;
    oo.config.tol = spec.tol;
    const auto t0 = std::chrono::steady_clock::now();
    const SuiteReport rep = oracle_suite(spec, stages, rng, oo);
    const auto grid = collect(rep, ".value_grid");
    const auto en = collect(rep, ".value_enumeration");
    const auto cen = collect(rep, ".cost_enumeration");
    const auto u = collect(rep, ".control");
    const auto w = collect(rep, ".disturbance");
    const auto bad = collect(rep, "_samples");
    verdict(4, "oracle equivalence", rep.ok(),
            fmt::format("50 states per stage: grid {:.3g} (1e-5), enumeration {:.3g} (1e-7), "
                        "optimizer {:.3g} (1e-4), {} failures",
                        grid.worst, std::max(en.worst, cen.worst), std::max(u.worst, w.worst),
                        rep.failures()));
    info(fmt::format("samples without a feasible oracle solution: {}", bad.worst));
    if (const auto* L = find(rep, "oracle.lipschitz_U")) info(fmt::format("{} {:.4g} {}", L->name, L->value, L->detail));
    info(fmt::format("{:.1f} s", seconds_since(t0)));
    print_failures(rep);
  }

  // 5. Regularity.
  {
    const auto cont = collect(stage_rep, ".continuity");
    const auto cvx = collect(stage_rep, ".convexity");
    const auto margin = collect(stage_rep, ".concavity_margin");
    double min_margin = std::numeric_limits<double>::infinity();
    for (const auto& l : stage_rep.lines)
      if (l.name.find("concavity_margin") != std::string::npos) min_margin = std::min(min_margin, l.value);

    const ProblemSpec relaxed = example_problem(pair.P, pair.Xf, 4, DpMode::ControlOnly, true);
    const auto rstages = run_recursion(relaxed);
    const SuiteReport rrep = stage_suite(relaxed, rstages, pair.Ku, rng, so);
    const auto c1 = collect(rrep, ".c1");
    const auto rcont = collect(rrep, ".continuity");
    const auto rcvx = collect(rrep, ".convexity");
    const auto rmargin = collect(rrep, ".concavity_margin");
    const bool pass = cont.pass && cvx.pass && margin.pass && c1.pass && rcont.pass && rcvx.pass &&
                      rmargin.pass;
    verdict(5, "regularity", pass,
            fmt::format("continuity violations {}, convexity violations {}, control-only max "
                        "gradient jump {:.3g} (limit 1e-5), min concavity margin {:.6g}",
                        cont.worst + rcont.worst, cvx.worst + rcvx.worst, c1.worst, min_margin));
    const auto jump = collect(stage_rep, ".gradient_jump");
    info(fmt::format("constrained mode gradient jump {:.4g} (kinks expected with state constraints)",
                     jump.worst));
    info(fmt::format("control-only run: N = {}, x-regions per stage {}", relaxed.N,
                     [&] {
                       std::string s;
                       for (const auto& st : rstages) s += fmt::format("{} ", st.x_regions);
                       return s;
                     }()));
    print_failures(rrep);

    const auto plain = run_recursion(example_problem(pair.P, pair.Xf, 2, DpMode::Constrained, false));
    const auto prep = stage_suite(example_problem(pair.P, pair.Xf, 2, DpMode::Constrained, false),
                                  plain, pair.Ku, rng, so);
    info(fmt::format("with overlaps left in place: continuity violations {}, partition overlaps {}",
                     collect(prep, ".continuity").worst, collect(prep, ".partition").worst));
  }

  // 6. Monotonicity and invariance.
  const auto t_cl = std::chrono::steady_clock::now();
  const SuiteReport cl = closed_loop_suite(spec, stages, rng);
  const double cl_secs = seconds_since(t_cl);
  {
    const auto mono = collect(stage_rep, ".monotonicity");
    const SuiteReport term =
        terminal_suite(model, pair, example::X(), example::U(), example::W(), rng, spec.tol);
    const auto* inv = find(term, "terminal.invariance");
    const auto* roll = find(cl, "closed_loop.robust_invariance");
    const bool pass = mono.pass && mono.worst <= 1e-8 && inv && inv->pass && roll && roll->pass;
    verdict(6, "monotonicity and invariance", pass,
            fmt::format("max V_i - V_(i-1) {:.3g} (limit 1e-8), X_f vertex violations {}, "
                        "escapes {} in 1000 rollouts",
                        mono.worst, inv ? inv->value : -1.0, roll ? roll->value : -1.0));
    const auto ptr = check_terminal_set(model, pair.Ku, pair.Kw, Xf_ref, example::X(),
                                        example::U(), example::W(), 1e-8);
    info(fmt::format("reference X_f: {} vertex invariance violations at 1e-8, worst excess {:.3g}",
                     ptr.invariance_violations, ptr.worst_slack));
    print_failures(term);
  }

  // 7. Finite gain and descent.
  {
    const auto* gain = find(cl, "closed_loop.finite_gain");
    const auto* desc = find(cl, "closed_loop.descent");
    verdict(7, "finite gain and descent", gain && desc && gain->pass && desc->pass,
            fmt::format("min certificate slack {:.4g} over 100 bursts (limit -1e-7), max descent "
                        "excess {:.3g} (limit 1e-7)",
                        gain ? gain->value : -1.0, desc ? desc->value : -1.0));
    if (gain) info(gain->detail);
    info(fmt::format("closed-loop suite {:.1f} s", cl_secs));
  }

  // 8. Geometry properties.
  {
    const auto t0 = std::chrono::steady_clock::now();
    GeometryTally t;
    std::mt19937_64 grng(99);
    for (int i = 0; i < 1000; ++i) geometry_instance(2 + i % 3, grng, t);
    verdict(8, "geometry properties", t.total() == 0,
            fmt::format("{} instances (dimension 2 to 4), {} violations", t.instances, t.total()));
    info(fmt::format("erosion-sum pairs {} ({} bad), lifts {} ({} bad), hull checks {} ({} bad)",
                     t.erosion_pairs, t.erosion_violations, t.lifts, t.lift_violations,
                     t.hull_checks, t.hull_violations));
    info(fmt::format("redundancy membership points {} ({} bad), partitions {} ({} bad)",
                     t.membership_points, t.membership_mismatches, t.partitions,
                     t.partition_violations));
    info(fmt::format("{:.1f} s", seconds_since(t0)));
  }

  fmt::print("{} of 8 criteria failed, {:.1f} s total\n", g_failures, seconds_since(t_all));
  return g_failures == 0 ? 0 : 1;
}
