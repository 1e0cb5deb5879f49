#include "hinfx/optbase.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hinfx/errors.hpp"

namespace hinfx {

namespace {

constexpr double kPivotTol = 1e-11;
constexpr int kMaxSimplexIterations = 50000;

void check_dims(const VectorXd& c, const MatrixXd& Ain, const VectorXd& bin, const MatrixXd& Aeq,
                const VectorXd& beq) {
  const auto n = c.size();
  if (Ain.rows() != bin.size() || (Ain.rows() > 0 && Ain.cols() != n))
    throw InputError("inequality block has inconsistent dimensions");
  if (Aeq.rows() != beq.size() || (Aeq.rows() > 0 && Aeq.cols() != n))
    throw InputError("equality block has inconsistent dimensions");
}

// Revised simplex on  min c'xi  s.t.  S xi = rhs, xi >= 0, starting from a
// feasible basis. Entering and leaving choices follow Bland's rule. The basis
// matrix is refactorized every iteration; problem sizes here are tiny.
enum class PhaseResult { Optimal, Unbounded, IterationLimit };

struct Standard {
  MatrixXd S;
  VectorXd rhs;
  VectorXd c;
  std::vector<int> basis;
  std::vector<bool> allowed;
};

PhaseResult run_simplex(Standard& st) {
  const int m = static_cast<int>(st.S.rows());
  const int ncol = static_cast<int>(st.S.cols());
  MatrixXd Bm(m, m);
  for (int iter = 0; iter < kMaxSimplexIterations; ++iter) {
    for (int i = 0; i < m; ++i) Bm.col(i) = st.S.col(st.basis[i]);
    Eigen::PartialPivLU<MatrixXd> lu(Bm);
    VectorXd xB = lu.solve(st.rhs);
    VectorXd cB(m);
    for (int i = 0; i < m; ++i) cB(i) = st.c(st.basis[i]);
    VectorXd y = lu.transpose().solve(cB);

    std::vector<bool> in_basis(ncol, false);
    for (int b : st.basis) in_basis[b] = true;

    const double scale = 1.0 + st.c.cwiseAbs().maxCoeff();
    int entering = -1;
    for (int j = 0; j < ncol; ++j) {
      if (in_basis[j] || !st.allowed[j]) continue;
      const double reduced = st.c(j) - st.S.col(j).dot(y);
      if (reduced < -1e-10 * scale) {
        entering = j;
        break;
      }
    }
    if (entering < 0) return PhaseResult::Optimal;

    VectorXd d = lu.solve(st.S.col(entering));
    int leave = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
      if (d(i) <= kPivotTol) continue;
      const double ratio = std::max(xB(i), 0.0) / d(i);
      if (ratio < best - 1e-14 ||
          (std::abs(ratio - best) <= 1e-14 && leave >= 0 && st.basis[i] < st.basis[leave])) {
        best = ratio;
        leave = i;
      }
    }
    if (leave < 0) return PhaseResult::Unbounded;
    st.basis[leave] = entering;
  }
  return PhaseResult::IterationLimit;
}

std::vector<int> eps_active_rows(const MatrixXd& A, const VectorXd& b, const VectorXd& x,
                                 double act) {
  std::vector<int> out;
  for (int i = 0; i < A.rows(); ++i) {
    const double scale = 1.0 + std::abs(b(i));
    if (b(i) - A.row(i).dot(x) <= act * scale) out.push_back(i);
  }
  return out;
}

}  // namespace

Solution solve_lp(const LpProblem& p, const Tolerances& tol) {
  check_dims(p.cost, p.Ain, p.bin, p.Aeq, p.beq);
  const int n = static_cast<int>(p.cost.size());
  const int mi = static_cast<int>(p.Ain.rows());
  const int me = static_cast<int>(p.Aeq.rows());
  const int m = mi + me;

  Solution out;
  out.lambda = VectorXd::Zero(mi);
  out.mu = VectorXd::Zero(me);

  if (m == 0) {
    if (p.cost.size() > 0 && p.cost.cwiseAbs().maxCoeff() > 0.0) {
      out.status = SolveStatus::Unbounded;
      return out;
    }
    out.status = SolveStatus::Optimal;
    out.x = VectorXd::Zero(n);
    return out;
  }

  // Columns: x+ (n), x- (n), inequality slacks (mi), artificials (m).
  const int nstruct = 2 * n + mi;
  const int ncol = nstruct + m;
  Standard st;
  st.S = MatrixXd::Zero(m, ncol);
  st.rhs = VectorXd(m);
  std::vector<double> sign(m, 1.0);
  for (int i = 0; i < m; ++i) {
    const bool ineq = i < mi;
    const auto row = ineq ? p.Ain.row(i) : p.Aeq.row(i - mi);
    const double rhs = ineq ? p.bin(i) : p.beq(i - mi);
    sign[i] = rhs < 0.0 ? -1.0 : 1.0;
    st.S.block(i, 0, 1, n) = sign[i] * row;
    st.S.block(i, n, 1, n) = -sign[i] * row;
    if (ineq) st.S(i, 2 * n + i) = sign[i];
    st.S(i, nstruct + i) = 1.0;
    st.rhs(i) = sign[i] * rhs;
  }

  // Phase 1: minimize the sum of artificials.
  st.c = VectorXd::Zero(ncol);
  st.c.tail(m).setOnes();
  st.basis.resize(m);
  std::iota(st.basis.begin(), st.basis.end(), nstruct);
  st.allowed.assign(ncol, true);
  if (run_simplex(st) == PhaseResult::IterationLimit)
    throw Error("simplex phase 1 exceeded its iteration limit");

  MatrixXd Bm(m, m);
  for (int i = 0; i < m; ++i) Bm.col(i) = st.S.col(st.basis[i]);
  VectorXd xB = Bm.partialPivLu().solve(st.rhs);
  double infeas = 0.0;
  for (int i = 0; i < m; ++i)
    if (st.basis[i] >= nstruct) infeas += std::max(xB(i), 0.0);
  if (infeas > tol.feas * (1.0 + st.rhs.cwiseAbs().maxCoeff())) {
    out.status = SolveStatus::Infeasible;
    return out;
  }

  // Drive artificials out of the basis; rows where that is impossible are
  // linearly dependent and are dropped.
  std::vector<int> keep_rows;
  {
    Eigen::PartialPivLU<MatrixXd> lu(Bm);
    MatrixXd tableau = lu.solve(st.S.leftCols(nstruct));
    std::vector<bool> in_basis(ncol, false);
    for (int b : st.basis) in_basis[b] = true;
    for (int i = 0; i < m; ++i) {
      if (st.basis[i] < nstruct) {
        keep_rows.push_back(i);
        continue;
      }
      int pivot = -1;
      for (int j = 0; j < nstruct; ++j) {
        if (!in_basis[j] && std::abs(tableau(i, j)) > 1e-9) {
          pivot = j;
          break;
        }
      }
      if (pivot >= 0) {
        in_basis[st.basis[i]] = false;
        st.basis[i] = pivot;
        in_basis[pivot] = true;
        for (int b = 0; b < m; ++b) Bm.col(b) = st.S.col(st.basis[b]);
        tableau = Bm.partialPivLu().solve(st.S.leftCols(nstruct));
        keep_rows.push_back(i);
      }
    }
  }

  Standard ph2;
  const int mk = static_cast<int>(keep_rows.size());
  ph2.S = MatrixXd(mk, nstruct);
  ph2.rhs = VectorXd(mk);
  for (int r = 0; r < mk; ++r) {
    ph2.S.row(r) = st.S.row(keep_rows[r]).head(nstruct);
    ph2.rhs(r) = st.rhs(keep_rows[r]);
    ph2.basis.push_back(st.basis[keep_rows[r]]);
  }
  ph2.c = VectorXd::Zero(nstruct);
  ph2.c.head(n) = p.cost;
  ph2.c.segment(n, n) = -p.cost;
  ph2.allowed.assign(nstruct, true);

  VectorXd xi = VectorXd::Zero(nstruct);
  VectorXd ytilde = VectorXd::Zero(m);
  if (mk > 0) {
    const PhaseResult r2 = run_simplex(ph2);
    if (r2 == PhaseResult::IterationLimit) throw Error("simplex phase 2 exceeded its iteration limit");
    if (r2 == PhaseResult::Unbounded) {
      out.status = SolveStatus::Unbounded;
      return out;
    }
    MatrixXd B2(mk, mk);
    VectorXd cB(mk);
    for (int i = 0; i < mk; ++i) {
      B2.col(i) = ph2.S.col(ph2.basis[i]);
      cB(i) = ph2.c(ph2.basis[i]);
    }
    Eigen::PartialPivLU<MatrixXd> lu(B2);
    VectorXd xb = lu.solve(ph2.rhs);
    for (int i = 0; i < mk; ++i) xi(ph2.basis[i]) = std::max(xb(i), 0.0);
    VectorXd y = lu.transpose().solve(cB);
    for (int r = 0; r < mk; ++r) ytilde(keep_rows[r]) = y(r);
  } else if (p.cost.size() > 0 && p.cost.cwiseAbs().maxCoeff() > 0.0) {
    out.status = SolveStatus::Unbounded;
    return out;
  }

  out.status = SolveStatus::Optimal;
  out.x = xi.head(n) - xi.segment(n, n);
  out.value = p.cost.dot(out.x);
  for (int i = 0; i < mi; ++i) out.lambda(i) = std::max(-sign[i] * ytilde(i), 0.0);
  for (int i = 0; i < me; ++i) out.mu(i) = -sign[mi + i] * ytilde(mi + i);
  out.eps_active = eps_active_rows(p.Ain, p.bin, out.x, tol.act);
  std::vector<int> positive;
  for (int i : out.eps_active) positive.push_back(i);
  out.active = independent_rows(p.Ain, positive);
  return out;
}

double support_value(const MatrixXd& H, const VectorXd& h, const VectorXd& direction,
                     const Tolerances& tol) {
  LpProblem lp;
  lp.cost = -direction;
  lp.Ain = H;
  lp.bin = h;
  lp.Aeq = MatrixXd(0, direction.size());
  lp.beq = VectorXd(0);
  const Solution s = solve_lp(lp, tol);
  if (s.status == SolveStatus::Infeasible) throw InfeasibleError("support of an empty set");
  if (s.status == SolveStatus::Unbounded) throw UnboundedError("set is unbounded in the support direction");
  return -s.value;
}

std::vector<int> independent_rows(const MatrixXd& M, const std::vector<int>& candidates,
                                  double rank_tol) {
  if (candidates.empty()) return {};
  MatrixXd sub(M.cols(), static_cast<Eigen::Index>(candidates.size()));
  for (std::size_t i = 0; i < candidates.size(); ++i) sub.col(i) = M.row(candidates[i]).transpose();
  Eigen::ColPivHouseholderQR<MatrixXd> qr(sub);
  qr.setThreshold(rank_tol);
  const auto rank = qr.rank();
  std::vector<int> out;
  for (Eigen::Index k = 0; k < rank; ++k) out.push_back(candidates[qr.colsPermutation().indices()(k)]);
  std::sort(out.begin(), out.end());
  return out;
}

double min_eigenvalue_on_nullspace(const MatrixXd& P, const MatrixXd& Aeq) {
  const MatrixXd Ps = 0.5 * (P + P.transpose());
  if (Ps.rows() == 0) return std::numeric_limits<double>::infinity();
  MatrixXd Z;
  if (Aeq.rows() == 0) {
    Z = MatrixXd::Identity(P.rows(), P.rows());
  } else {
    Eigen::FullPivLU<MatrixXd> lu(Aeq);
    lu.setThreshold(1e-10);
    Z = lu.kernel();
    if (lu.rank() == Aeq.cols()) return std::numeric_limits<double>::infinity();
  }
  const MatrixXd R = Z.transpose() * Ps * Z;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(R, Eigen::EigenvaluesOnly);
  // Kernel bases from FullPivLU are not orthonormal; normalize the curvature
  // by the basis scaling so the threshold keeps its meaning.
  Eigen::SelfAdjointEigenSolver<MatrixXd> gram(Z.transpose() * Z, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() / gram.eigenvalues().maxCoeff();
}

Solution solve_qp(const QpProblem& p, const Tolerances& tol) {
  check_dims(p.linear, p.Ain, p.bin, p.Aeq, p.beq);
  const int n = static_cast<int>(p.linear.size());
  if (p.hessian.rows() != n || p.hessian.cols() != n) throw InputError("hessian has wrong shape");
  const int mi = static_cast<int>(p.Ain.rows());
  const int me = static_cast<int>(p.Aeq.rows());
  const MatrixXd P = 0.5 * (p.hessian + p.hessian.transpose());

  if (min_eigenvalue_on_nullspace(P, p.Aeq) <= tol.pd)
    throw InputError("QP hessian is not positive definite on the feasible subspace");

  // Feasible starting point.
  LpProblem feas;
  feas.cost = VectorXd::Zero(n);
  feas.Ain = p.Ain;
  feas.bin = p.bin;
  feas.Aeq = p.Aeq.rows() ? p.Aeq : MatrixXd(0, n);
  feas.beq = p.Aeq.rows() ? p.beq : VectorXd(0);
  const Solution start = solve_lp(feas, tol);
  Solution out;
  out.lambda = VectorXd::Zero(mi);
  out.mu = VectorXd::Zero(me);
  if (start.status == SolveStatus::Infeasible) {
    out.status = SolveStatus::Infeasible;
    return out;
  }
  VectorXd x = start.x;

  // Equalities are always in the working set.
  std::vector<int> working;
  VectorXd nu;
  bool converged = false;
  for (int iter = 0; iter < 2000 && !converged; ++iter) {
    const int w = static_cast<int>(working.size());
    const int k = me + w;
    MatrixXd Aw(k, n);
    if (me) Aw.topRows(me) = p.Aeq;
    for (int i = 0; i < w; ++i) Aw.row(me + i) = p.Ain.row(working[i]);

    MatrixXd kkt = MatrixXd::Zero(n + k, n + k);
    kkt.topLeftCorner(n, n) = P;
    kkt.topRightCorner(n, k) = Aw.transpose();
    kkt.bottomLeftCorner(k, n) = Aw;
    VectorXd rhs = VectorXd::Zero(n + k);
    rhs.head(n) = -(P * x + p.linear);
    const VectorXd sol = kkt.fullPivLu().solve(rhs);
    const VectorXd step = sol.head(n);
    nu = sol.tail(k);

    if (step.norm() <= 1e-12 * (1.0 + x.norm())) {
      int drop = -1;
      double most_negative = -tol.kkt;
      for (int i = 0; i < w; ++i) {
        if (nu(me + i) < most_negative) {
          most_negative = nu(me + i);
          drop = i;
        }
      }
      if (drop < 0) {
        converged = true;
        break;
      }
      working.erase(working.begin() + drop);
      continue;
    }

    double alpha = 1.0;
    int blocking = -1;
    for (int i = 0; i < mi; ++i) {
      if (std::find(working.begin(), working.end(), i) != working.end()) continue;
      const double ap = p.Ain.row(i).dot(step);
      if (ap <= 1e-14) continue;
      const double room = std::max(p.bin(i) - p.Ain.row(i).dot(x), 0.0);
      const double t = room / ap;
      if (t < alpha) {
        alpha = t;
        blocking = i;
      }
    }
    x += alpha * step;
    if (blocking >= 0) {
      working.push_back(blocking);
      std::sort(working.begin(), working.end());
    }
  }
  if (!converged) throw Error("QP active-set iteration limit reached");

  out.status = SolveStatus::Optimal;
  out.x = x;
  out.value = 0.5 * x.dot(P * x) + p.linear.dot(x);
  for (int i = 0; i < me; ++i) out.mu(i) = nu(i);
  for (std::size_t i = 0; i < working.size(); ++i) out.lambda(working[i]) = std::max(nu(me + i), 0.0);
  out.active = working;
  out.eps_active = eps_active_rows(p.Ain, p.bin, x, tol.act);
  return out;
}

}  // namespace hinfx
