#include "hinfx/terminal.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>
#include <sstream>

#include "hinfx/errors.hpp"

namespace hinfx {

namespace {

double min_eig(const MatrixXd& S) {
  return Eigen::SelfAdjointEigenSolver<MatrixXd>(0.5 * (S + S.transpose())).eigenvalues()(0);
}

std::string matrix_text(const MatrixXd& M) {
  std::ostringstream os;
  os.precision(17);
  os << M;
  return os.str();
}

}  // namespace

void GameModel::validate() const {
  const int nx = n();
  if (A.cols() != nx || nx == 0) throw InputError("A must be square and nonempty");
  if (B.rows() != nx || B.cols() == 0) throw InputError("B must have as many rows as A");
  if (G.rows() != nx || G.cols() == 0) throw InputError("G must have as many rows as A");
  if (Q.rows() != nx || Q.cols() != nx) throw InputError("Q must be n x n");
  if (R.rows() != m() || R.cols() != m()) throw InputError("R must be m x m");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InputError("gamma must be positive");
  if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-12) throw InputError("Q is not symmetric");
  if ((R - R.transpose()).cwiseAbs().maxCoeff() > 1e-12) throw InputError("R is not symmetric");
  if (min_eig(Q) <= 0.0) throw InputError("Q is not positive definite");
  if (min_eig(R) <= 0.0) throw InputError("R is not positive definite");
}

bool is_stabilizable(const MatrixXd& A, const MatrixXd& B, double tol) {
  const auto n = A.rows();
  Eigen::EigenSolver<MatrixXd> es(A);
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::complex<double> lambda = es.eigenvalues()(i);
    if (std::abs(lambda) < 1.0 - tol) continue;
    Eigen::MatrixXcd M(n, n + B.cols());
    M.leftCols(n) = A.cast<std::complex<double>>() -
                    lambda * Eigen::MatrixXcd::Identity(n, n);
    M.rightCols(B.cols()) = B.cast<std::complex<double>>();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M);
    const auto& sv = svd.singularValues();
    if (sv(n - 1) <= tol * std::max(1.0, sv(0))) return false;
  }
  return true;
}

double spectral_radius(const MatrixXd& M) {
  Eigen::EigenSolver<MatrixXd> es(M, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

RiccatiSolution solve_hinf_riccati(const GameModel& model, const RiccatiOptions& opt) {
  model.validate();
  if (!is_stabilizable(model.A, model.B)) throw NotStabilizableError("(A, B) is not stabilizable");
  const int m = model.m(), p = model.p();
  const double g2 = model.gamma * model.gamma;
  MatrixXd E(model.n(), m + p);
  E << model.B, model.G;
  MatrixXd D = MatrixXd::Zero(m + p, m + p);
  D.topLeftCorner(m, m) = model.R;
  D.bottomRightCorner(p, p) = -g2 * MatrixXd::Identity(p, p);

  RiccatiSolution out;
  MatrixXd P = model.Q;
  for (int it = 1; it <= opt.max_iterations; ++it) {
    const MatrixXd margin = g2 * MatrixXd::Identity(p, p) - model.G.transpose() * P * model.G;
    if (min_eig(margin) <= 0.0)
      throw GammaInfeasibleError("gamma^2 I - G'PG is not positive definite at iteration " +
                                 std::to_string(it) + ", P =\n" + matrix_text(P));
    const MatrixXd S = D + E.transpose() * P * E;
    const MatrixXd L = E.transpose() * P * model.A;
    const MatrixXd gains = -S.fullPivLu().solve(L);
    MatrixXd next = model.Q + model.A.transpose() * P * model.A + L.transpose() * gains;
    next = 0.5 * (next + next.transpose()).eval();
    if (!next.allFinite() || next.norm() > 1e12)
      throw NotStabilizableError("Riccati iterates diverge");
    const double delta = (next - P).norm();
    P = std::move(next);
    if (delta <= opt.tolerance) {
      const MatrixXd S2 = D + E.transpose() * P * E;
      const MatrixXd K = -S2.fullPivLu().solve(E.transpose() * P * model.A);
      out.P = P;
      out.Ku = K.topRows(m);
      out.Kw = K.bottomRows(p);
      out.iterations = it;
      if (min_eig(g2 * MatrixXd::Identity(p, p) - model.G.transpose() * P * model.G) <= 0.0)
        throw GammaInfeasibleError("gamma^2 I - G'PG is not positive definite at the fixed point");
      return out;
    }
  }
  throw GammaInfeasibleError("Riccati iteration did not converge, last P =\n" + matrix_text(P));
}

double verify_fake_hjb(const GameModel& model, const TerminalPair& pair, std::mt19937_64& rng,
                       int samples) {
  std::normal_distribution<double> nd;
  double worst = 0.0;
  for (int k = 0; k < samples; ++k) {
    VectorXd x(model.n());
    for (int i = 0; i < x.size(); ++i) x(i) = nd(rng);
    x.normalize();
    const VectorXd xc = pair.Ac * x;
    const double r = 0.5 * xc.dot(pair.P * xc) - 0.5 * x.dot(pair.P * x) +
                     model.stage_cost(x, pair.Ku * x, pair.Kw * x);
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

Polytope compute_terminal_set(const GameModel& model, const MatrixXd& Ku, const MatrixXd& Kw,
                              const Polytope& X, const Polytope& U, const Polytope& W,
                              const Tolerances& tol, int max_iterations) {
  const int n = model.n();
  const MatrixXd Af = model.A + model.B * Ku;
  if (spectral_radius(Af) >= 1.0) throw InputError("A + B Ku is not stable");
  Polytope omega = add_rows(X, W.H() * Kw, W.h(), tol);
  omega = add_rows(omega, U.H() * Ku, U.h(), tol);
  if (omega.is_empty()) throw InfeasibleError("terminal seed set is empty");
  omega = remove_redundancy(omega, tol);
  for (int k = 0; k < max_iterations; ++k) {
    const Polytope eroded = pontryagin_difference(omega, model.G, W, tol);
    if (eroded.is_empty()) throw InfeasibleError("disturbance set W is too large for a terminal set");
    const Polytope pre = affine_preimage(eroded, Af, VectorXd::Zero(n), tol);
    Polytope next = add_rows(omega, pre.H(), pre.h(), tol);
    if (next.is_empty() || !next.is_full_dimensional(tol.interior))
      throw InfeasibleError("disturbance set W is too large for a terminal set");
    next = remove_redundancy(next, tol);
    if (is_subset(omega, next, 1e-9)) return next;
    omega = std::move(next);
  }
  throw InfeasibleError("terminal set iteration did not terminate within " +
                        std::to_string(max_iterations) + " steps");
}

TerminalPair synthesize_terminal(const GameModel& model, const Polytope& X, const Polytope& U,
                                 const Polytope& W, const Tolerances& tol) {
  const auto ric = solve_hinf_riccati(model);
  TerminalPair pair;
  pair.P = ric.P;
  pair.Ku = ric.Ku;
  pair.Kw = ric.Kw;
  pair.Af = model.A + model.B * ric.Ku;
  pair.Ac = pair.Af + model.G * ric.Kw;
  pair.gamma = model.gamma;
  pair.Xf = compute_terminal_set(model, ric.Ku, ric.Kw, X, U, W, tol);
  return pair;
}

TerminalReport check_terminal_set(const GameModel& model, const MatrixXd& Ku, const MatrixXd& Kw,
                                  const Polytope& Xf, const Polytope& X, const Polytope& U,
                                  const Polytope& W, double tol) {
  TerminalReport rep;
  const MatrixXd Af = model.A + model.B * Ku;
  const auto vx = vertices(Xf);
  const auto vw = vertices(W);
  auto note = [&](double v, int& counter) {
    rep.worst_slack = std::max(rep.worst_slack, v);
    if (v > tol) ++counter;
  };
  for (const auto& v : vx) {
    note(X.max_violation(v), rep.containment_violations);
    note(U.max_violation(Ku * v), rep.input_violations);
    note(W.max_violation(Kw * v), rep.disturbance_violations);
    for (const auto& w : vw) note(Xf.max_violation(Af * v + model.G * w), rep.invariance_violations);
  }
  return rep;
}

double gamma_threshold(GameModel model, double lo, double hi, double rel_tol) {
  auto feasible = [&](double g) {
    model.gamma = g;
    try {
      solve_hinf_riccati(model);
      return true;
    } catch (const GammaInfeasibleError&) {
      return false;
    }
  };
  if (!feasible(hi)) throw GammaInfeasibleError("upper gamma bound is infeasible");
  if (feasible(lo)) return lo;
  while (hi - lo > rel_tol * hi) {
    const double mid = 0.5 * (lo + hi);
    (feasible(mid) ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace hinfx
