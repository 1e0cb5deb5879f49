#include "hinfx/oracle.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>

#include "hinfx/errors.hpp"
#include "hinfx/optbase.hpp"

namespace hinfx {

namespace {

// f(v) = 1/2 v'Hv + g'v + c over {v | A v <= b}.
struct Slice {
  MatrixXd H;
  VectorXd g;
  double c = 0.0;
  MatrixXd A;
  VectorXd b;
};

// Restrict f(theta, v) and the rows [Ht Hv](theta, v) <= h to a fixed theta.
Slice slice(const QuadraticForm& f, const MatrixXd& rows, const VectorXd& rhs, const VectorXd& theta) {
  const auto k = theta.size();
  const auto d = f.dim() - k;
  Slice s;
  s.H = f.Q.bottomRightCorner(d, d);
  s.g = f.Q.bottomLeftCorner(d, k) * theta + f.q.tail(d);
  s.c = 0.5 * theta.dot(f.Q.topLeftCorner(k, k) * theta) + f.q.head(k).dot(theta) + f.s;
  s.A = rows.rightCols(d);
  s.b = rhs - rows.leftCols(k) * theta;
  return s;
}

bool next_subset(std::vector<int>& idx, int n) {
  const int k = static_cast<int>(idx.size());
  int i = k - 1;
  while (i >= 0 && idx[i] == n - k + i) --i;
  if (i < 0) return false;
  ++idx[i];
  for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  return true;
}

// Best KKT point of the slice; `maximize` flips the objective.
void enumerate(const Slice& s, bool maximize, int cell, const Tolerances& tol, OracleResult& best) {
  const double sign = maximize ? -1.0 : 1.0;
  const auto d = s.H.rows();
  const MatrixXd Hs = sign * s.H;
  const double mineig = Eigen::SelfAdjointEigenSolver<MatrixXd>(0.5 * (Hs + Hs.transpose()))
                            .eigenvalues()(0);
  if (mineig <= tol.pd)
    throw ModeError(maximize ? "objective slice is not strictly concave"
                             : "objective slice is not strictly convex");
  std::vector<int> rows;
  for (Eigen::Index r = 0; r < s.A.rows(); ++r) {
    if (s.A.row(r).norm() > 1e-12)
      rows.push_back(static_cast<int>(r));
    else if (s.b(r) < -tol.feas * (1.0 + std::abs(s.b(r))))
      return;  // a parameter-only row fails: the cell misses theta
  }
  const int nr = static_cast<int>(rows.size());
  auto feasible = [&](const VectorXd& v) {
    const VectorXd slack = s.A * v - s.b;
    for (Eigen::Index r = 0; r < slack.size(); ++r)
      if (slack(r) > 1e-9 * (1.0 + std::abs(s.b(r)))) return false;
    return true;
  };
  for (int k = 0; k <= std::min<int>(static_cast<int>(d), nr); ++k) {
    std::vector<int> idx(k);
    for (int i = 0; i < k; ++i) idx[i] = i;
    do {
      MatrixXd K = MatrixXd::Zero(d + k, d + k);
      VectorXd r(d + k);
      K.topLeftCorner(d, d) = Hs;
      r.head(d) = -sign * s.g;
      for (int i = 0; i < k; ++i) {
        K.block(0, d + i, d, 1) = s.A.row(rows[idx[i]]).transpose();
        K.block(d + i, 0, 1, d) = s.A.row(rows[idx[i]]);
        r(d + i) = s.b(rows[idx[i]]);
      }
      ++best.systems;
      Eigen::FullPivLU<MatrixXd> lu(K);
      if (lu.rank() < d + k) continue;
      const VectorXd sol = lu.solve(r);
      const VectorXd v = sol.head(d);
      if (k > 0 && sol.tail(k).minCoeff() < -1e-9) continue;
      if (!feasible(v)) continue;
      const double value = 0.5 * v.dot(s.H * v) + s.g.dot(v) + s.c;
      if (!best.feasible || (maximize ? value > best.value : value < best.value)) {
        best.feasible = true;
        best.value = value;
        best.optimizer = v;
        best.cell = cell;
      }
    } while (k > 0 && next_subset(idx, nr));
  }
}

MatrixXd stack_rows(const MatrixXd& a, const MatrixXd& b) {
  MatrixXd out(a.rows() + b.rows(), a.cols());
  out << a, b;
  return out;
}

VectorXd stack_vec(const VectorXd& a, const VectorXd& b) {
  VectorXd out(a.size() + b.size());
  out << a, b;
  return out;
}

}  // namespace

OracleResult oracle_enumerate(const ParametricProblem& problem, const VectorXd& theta,
                              const OracleConfig& cfg) {
  if (theta.size() != problem.param_dim) throw InputError("parameter has the wrong dimension");
  const auto& obj = problem.objective;
  const bool maximize = problem.mode == Mode::Max;
  OracleResult best;
  for (int c = 0; c < obj.size(); ++c) {
    const MatrixXd rows = stack_rows(obj.cells[c].H(), problem.constraint.H());
    const VectorXd rhs = stack_vec(obj.cells[c].h(), problem.constraint.h());
    enumerate(slice(obj.pieces[c], rows, rhs, theta), maximize, c, cfg.tol, best);
  }
  return best;
}

OracleResult StageOracle::max_at(const VectorXd& x, const VectorXd& u, const OracleConfig& cfg) const {
  const auto& g = model;
  const int p = g.p();
  const VectorXd s = g.A * x + g.B * u;
  const double g2 = g.gamma * g.gamma;
  const double base = g.stage_cost(x, u, VectorXd::Zero(p));
  OracleResult best;
  for (int c = 0; c < Vprev.size(); ++c) {
    const auto& piece = Vprev.pieces[c];
    Slice sl;
    sl.H = -g2 * MatrixXd::Identity(p, p) + g.G.transpose() * piece.Q * g.G;
    sl.g = g.G.transpose() * (piece.Q * s + piece.q);
    sl.c = base + piece(s);
    const Polytope& cell = Vprev.cells[c];
    sl.A = stack_rows(stack_rows(cell.H() * g.G, Xprev.H() * g.G), W.H());
    sl.b = stack_vec(stack_vec(cell.h() - cell.H() * s, Xprev.h() - Xprev.H() * s), W.h());
    enumerate(sl, true, c, cfg.tol, best);
  }
  return best;
}

std::pair<double, double> StageOracle::input_interval(const VectorXd& x, const OracleConfig&) const {
  if (model.m() != 1) throw UnsupportedError("the grid oracle needs a scalar input");
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  auto apply = [&](double a, double r) {
    if (std::abs(a) <= 1e-14) {
      if (r < 0.0) lo = 1.0, hi = 0.0;
    } else if (a > 0.0) {
      hi = std::min(hi, r / a);
    } else {
      lo = std::max(lo, r / a);
    }
  };
  for (int r = 0; r < U.rows(); ++r) apply(U.H()(r, 0), U.h()(r));
  if (robust) {
    // Convexity: every successor stays inside iff the vertex successors do.
    const VectorXd Bu = model.B.col(0);
    for (const auto& w : vertices(W)) {
      const VectorXd s = model.A * x + model.G * w;
      for (int r = 0; r < Xprev.rows(); ++r)
        apply(Xprev.H().row(r).dot(Bu), Xprev.h()(r) - Xprev.H().row(r).dot(s));
    }
  }
  return {lo, hi};
}

OracleResult grid_golden_min(const std::function<double(double)>& f, double lo, double hi,
                             const OracleConfig& cfg) {
  OracleResult out;
  if (!(lo <= hi)) return out;
  const int n = std::max(cfg.grid_points, 2);
  const double h = (hi - lo) / (n - 1);
  int k_best = 0;
  double v_best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < n; ++k) {
    const double v = f(lo + k * h);
    ++out.systems;
    if (v < v_best) {
      v_best = v;
      k_best = k;
    }
  }
  double a = lo + std::max(k_best - 1, 0) * h;
  double b = lo + std::min(k_best + 1, n - 1) * h;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = f(c), fd = f(d);
  out.systems += 2;
  while (b - a > cfg.golden_tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = f(d);
    }
    ++out.systems;
  }
  const double mid = 0.5 * (a + b);
  double u = mid, v = f(mid);
  if (v_best < v) {
    u = lo + k_best * h;
    v = v_best;
  }
  out.feasible = true;
  out.optimizer = VectorXd::Constant(1, u);
  out.value = v;
  return out;
}

OracleResult StageOracle::min_grid(const VectorXd& x, const OracleConfig& cfg) const {
  const auto [lo, hi] = input_interval(x, cfg);
  auto J = [&](double u) {
    const auto r = max_at(x, VectorXd::Constant(1, u), cfg);
    return r.feasible ? r.value : std::numeric_limits<double>::infinity();
  };
  return grid_golden_min(J, lo, hi, cfg);
}

LipschitzReport oracle_lipschitz_U(const Polytope& Z, int param_dim, int samples,
                                   std::mt19937_64& rng, const Tolerances& tol) {
  LipschitzReport rep;
  const int k = param_dim;
  const int d = Z.dim() - k;
  const MatrixXd Hx = Z.H().leftCols(k);
  const MatrixXd Hu = Z.H().rightCols(d);
  const auto pts = sample_uniform(Z, 2 * samples, rng, tol);
  std::uniform_real_distribution<double> expo(-3.0, -1.0);
  std::normal_distribution<double> nd;
  auto [lo, hi] = bounding_box(Z, tol);
  const double scale = (hi - lo).head(k).norm();
  for (int i = 0; i < samples; ++i) {
    const VectorXd& a = pts[2 * i];
    const VectorXd x = a.head(k), u = a.tail(d);
    VectorXd x2;
    if (i % 2 == 0) {
      x2 = pts[2 * i + 1].head(k);
    } else {
      VectorXd dir(k);
      for (int j = 0; j < k; ++j) dir(j) = nd(rng);
      x2 = x + std::pow(10.0, expo(rng)) * scale * dir.normalized();
    }
    const double dx = (x - x2).norm();
    if (dx <= 1e-12) continue;
    QpProblem qp;
    qp.hessian = MatrixXd::Identity(d, d);
    qp.linear = -u;
    qp.Ain = Hu;
    qp.bin = Z.h() - Hx * x2;
    const Solution s = solve_qp(qp, tol);
    if (s.status != SolveStatus::Optimal) continue;  // U(x') empty
    ++rep.pairs;
    rep.max_ratio = std::max(rep.max_ratio, (s.x - u).norm() / dx);
  }
  return rep;
}

}  // namespace hinfx
