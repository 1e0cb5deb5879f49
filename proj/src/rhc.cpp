#include "hinfx/rhc.hpp"

#include <spdlog/fmt/fmt.h>

#include <cmath>
#include <limits>

#include "hinfx/errors.hpp"

namespace hinfx {

ClosedLoop ClosedLoop::from_stages(const ProblemSpec& spec, const std::vector<StageResult>& stages) {
  if (stages.empty()) throw InputError("no stages to build a controller from");
  const StageResult& last = stages.back();
  if (last.j == 0) throw InputError("a receding-horizon law needs N >= 1");
  ClosedLoop loop;
  loop.model = spec.model;
  loop.W = spec.W;
  loop.XN = last.Xj;
  loop.VN = last.V;
  loop.kappaN = last.kappa;
  loop.nu = last.nu;
  return loop;
}

double Trajectory::dynamics_residual(const GameModel& g) const {
  double worst = 0.0;
  for (int i = 0; i < steps(); ++i)
    worst = std::max(worst, (x[i + 1] - g.step(x[i], u[i], w[i])).cwiseAbs().maxCoeff());
  return worst;
}

VectorXd output(const GameModel& g, const VectorXd& x, const VectorXd& u) {
  const MatrixXd Cq = Eigen::LLT<MatrixXd>(g.Q).matrixU();
  const MatrixXd Cr = Eigen::LLT<MatrixXd>(g.R).matrixU();
  VectorXd y(g.n() + g.m());
  y << Cq * x, Cr * u;
  return y;
}

VectorXd pick_disturbance(const ClosedLoop& loop, const DisturbanceSource& source, int i,
                          const VectorXd& x, const VectorXd& u, std::mt19937_64& rng,
                          const Tolerances& tol) {
  const auto& g = loop.model;
  switch (source.kind) {
    case DisturbanceKind::Zero:
      return VectorXd::Zero(g.p());
    case DisturbanceKind::Sequence:
      if (i < static_cast<int>(source.sequence.size())) {
        if (source.sequence[i].size() != g.p())
          throw InputError("disturbance " + std::to_string(i) + " has the wrong dimension");
        return source.sequence[i];
      }
      return VectorXd::Zero(g.p());
    case DisturbanceKind::Random:
      return sample_uniform(loop.W, 1, rng, tol).front();
    case DisturbanceKind::Adversary: {
      if (!loop.nu) throw InputError("no maximizer law available");
      VectorXd z(g.n() + g.m());
      z << x, u;
      return evaluate(*loop.nu, z, tol.feas);
    }
    case DisturbanceKind::Worst: {
      VectorXd best;
      double score = -std::numeric_limits<double>::infinity();
      for (const auto& w : vertices(loop.W, tol)) {
        const VectorXd next = g.step(x, u, w);
        const double viol = loop.XN.max_violation(next);
        // A vertex that escapes X_N beats every vertex that does not.
        const double s = viol > tol.feas ? 1e300 + viol : evaluate(loop.VN, next, tol.feas);
        if (s > score) {
          score = s;
          best = w;
        }
      }
      return best;
    }
  }
  throw InputError("unknown disturbance kind");
}

Trajectory simulate(const ClosedLoop& loop, const VectorXd& x0, const DisturbanceSource& source,
                    int steps, const Tolerances& tol) {
  const auto& g = loop.model;
  if (x0.size() != g.n()) throw InputError("x0 has the wrong dimension");
  if (!loop.XN.contains(x0, tol.feas)) throw DomainError("x0 is outside X_N");
  std::mt19937_64 rng(source.seed);
  Trajectory t;
  t.x.push_back(x0);
  t.value.push_back(evaluate(loop.VN, x0, tol.feas));
  for (int i = 0; i < steps; ++i) {
    const VectorXd& x = t.x.back();
    const VectorXd u = evaluate(loop.kappaN, x, tol.feas);
    const VectorXd w = pick_disturbance(loop, source, i, x, u, rng, tol);
    const VectorXd next = g.step(x, u, w);
    t.u.push_back(u);
    t.w.push_back(w);
    t.y.push_back(output(g, x, u));
    t.cost.push_back(g.stage_cost(x, u, w));
    if (!loop.XN.contains(next, tol.feas))
      throw CertificateViolation("state left X_N at step " + std::to_string(i + 1), i + 1);
    t.x.push_back(next);
    t.value.push_back(evaluate(loop.VN, next, tol.feas));
  }
  return t;
}

GainCertificate finite_gain_certificate(const GameModel& g, const Trajectory& t) {
  GainCertificate c;
  for (int i = 0; i < t.steps(); ++i) {
    c.output_energy += 0.5 * t.y[i].squaredNorm();
    c.disturbance_energy += 0.5 * g.gamma * g.gamma * t.w[i].squaredNorm();
  }
  c.initial_value = t.value.front();
  c.slack = c.disturbance_energy + c.initial_value - c.output_energy;
  c.settled = t.x.back().norm() <= 1e-6;
  return c;
}

double worst_descent(const GameModel& g, const Trajectory& t) {
  double worst = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < t.steps(); ++i)
    worst = std::max(worst, t.value[i + 1] - t.value[i] + g.stage_cost(t.x[i], t.u[i], t.w[i]));
  return worst;
}

VectorXd sample_union(const std::vector<Polytope>& sets, std::mt19937_64& rng,
                      const Tolerances& tol) {
  if (sets.empty()) throw InputError("cannot sample an empty union");
  std::vector<double> weight;
  for (const auto& s : sets)
    weight.push_back(s.is_empty() ? 0.0 : std::pow(std::max(s.chebyshev_radius(), 0.0), s.dim()));
  std::discrete_distribution<int> pick(weight.begin(), weight.end());
  return sample_uniform(sets[pick(rng)], 1, rng, tol).front();
}

AttractionReport attraction_check(const ProblemSpec& spec, const std::vector<StageResult>& stages,
                                  std::mt19937_64& rng, int runs, int tail) {
  const StageResult& last = stages.back();
  if (last.XjStar.empty()) throw InputError("attraction check needs the restricted recursion");
  const ClosedLoop loop = ClosedLoop::from_stages(spec, stages);
  const auto wv = vertices(spec.W, spec.tol);
  std::uniform_int_distribution<std::size_t> vertex(0, wv.size() - 1);
  const int N = last.j;

  AttractionReport rep;
  for (int r = 0; r < runs; ++r) {
    ++rep.runs;
    std::vector<VectorXd> path{sample_union(last.XjStar, rng, spec.tol)};
    int entered = -1;
    bool failed = false;
    for (int i = 0; i <= N + tail; ++i) {
      const VectorXd& x = path.back();
      const bool inside = spec.Xf.contains(x, spec.tol.feas);
      if (inside && entered < 0) entered = i;
      if ((entered >= 0 && !inside) || (entered < 0 && i >= N) ||
          !loop.XN.contains(x, spec.tol.feas)) {
        failed = true;
        break;
      }
      if (i == N + tail) break;
      const VectorXd u = evaluate(loop.kappaN, x, spec.tol.feas);
      path.push_back(spec.model.step(x, u, wv[vertex(rng)]));
    }
    if (failed) {
      if (rep.failures++ == 0) rep.counterexample = path;
    } else {
      rep.max_steps_to_enter = std::max(rep.max_steps_to_enter, entered);
    }
  }
  return rep;
}

std::string trajectory_csv(const Trajectory& t) {
  std::string out = "i";
  auto head = [&](const char* name, Eigen::Index n) {
    for (Eigen::Index k = 0; k < n; ++k) out += fmt::format(",{}{}", name, k + 1);
  };
  const auto n = t.x.front().size();
  head("x", n);
  if (t.steps() > 0) {
    head("u", t.u.front().size());
    head("w", t.w.front().size());
    head("y", t.y.front().size());
  }
  out += ",l,V\n";
  auto put = [&](const VectorXd& v) {
    for (Eigen::Index k = 0; k < v.size(); ++k) out += fmt::format(",{:.17g}", v(k));
  };
  for (int i = 0; i <= t.steps(); ++i) {
    out += std::to_string(i);
    put(t.x[i]);
    if (i < t.steps()) {
      put(t.u[i]);
      put(t.w[i]);
      put(t.y[i]);
      out += fmt::format(",{:.17g}", t.cost[i]);
    } else if (t.steps() > 0) {
      // The last state has no input; leave the per-step columns empty.
      out += std::string(t.u[0].size() + t.w[0].size() + t.y[0].size() + 1, ',');
    }
    out += fmt::format(",{:.17g}\n", t.value[i]);
  }
  return out;
}

}  // namespace hinfx
