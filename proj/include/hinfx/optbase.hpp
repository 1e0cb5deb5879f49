#pragma once

#include <Eigen/Dense>
#include <vector>

#include "hinfx/config.hpp"

namespace hinfx {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// min c'x  s.t.  Ain x <= bin,  Aeq x = beq.  x is free.
struct LpProblem {
  VectorXd cost;
  MatrixXd Ain;
  VectorXd bin;
  MatrixXd Aeq;
  VectorXd beq;
};

/// min 1/2 x'Px + q'x  s.t.  Ain x <= bin,  Aeq x = beq.
struct QpProblem {
  MatrixXd hessian;
  VectorXd linear;
  MatrixXd Ain;
  VectorXd bin;
  MatrixXd Aeq;
  VectorXd beq;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded };

/// Result of an LP or QP solve. Multipliers follow the convention
/// grad f + Ain' lambda + Aeq' mu = 0 with lambda >= 0.
struct Solution {
  SolveStatus status = SolveStatus::Infeasible;
  VectorXd x;
  double value = 0.0;
  /// Linearly independent subset of the active inequalities.
  std::vector<int> active;
  /// Every inequality with slack below the activation tolerance.
  std::vector<int> eps_active;
  VectorXd lambda;
  VectorXd mu;

  bool optimal() const { return status == SolveStatus::Optimal; }
};

Solution solve_lp(const LpProblem& p, const Tolerances& tol = {});
Solution solve_qp(const QpProblem& p, const Tolerances& tol = {});

/// max{ a'x | H x <= h }. Throws InfeasibleError / UnboundedError.
double support_value(const MatrixXd& H, const VectorXd& h, const VectorXd& direction,
                     const Tolerances& tol = {});

/// Indices (into `candidates`, returned as the original row ids) of a maximal
/// linearly independent subset of the rows M(candidates, :), chosen by QR with
/// column pivoting on M'.
std::vector<int> independent_rows(const MatrixXd& M, const std::vector<int>& candidates,
                                  double rank_tol = 1e-9);

/// Smallest eigenvalue of the symmetric part of P restricted to null(Aeq).
double min_eigenvalue_on_nullspace(const MatrixXd& P, const MatrixXd& Aeq);

}  // namespace hinfx
