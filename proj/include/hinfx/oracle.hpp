#pragma once

#include <functional>
#include <random>
#include <vector>

#include "hinfx/dp.hpp"

namespace hinfx {

// Brute-force reference solutions at a fixed parameter. Nothing here calls
// into the parametric solver; the KKT systems are enumerated directly.

struct OracleConfig {
  int grid_points = 1001;      ///< per scalar decision
  double golden_tol = 1e-11;   ///< bracket width at which golden section stops
  Tolerances tol;
};

struct OracleResult {
  bool feasible = false;
  VectorXd optimizer;
  double value = 0.0;
  int cell = -1;
  int systems = 0;  ///< KKT systems or objective evaluations used
};

/// Optimum over the decision part of a ParametricProblem at parameter theta,
/// by enumerating every active subset of size <= decision dim of every cell
/// (cell rows plus constraint rows). Throws ModeError if a cell slice is not
/// strictly convex (Min) or concave (Max) in the decision.
OracleResult oracle_enumerate(const ParametricProblem& problem, const VectorXd& theta,
                              const OracleConfig& cfg = {});

/// One stage of the game written without any assembled problem:
/// J(x, u) = max { l(x, u, w) + Vprev(Ax + Bu + Gw) | w in W, Ax + Bu + Gw in Xprev },
/// V(x)    = min { J(x, u) | u in U, robust: Ax + Bu + GW inside Xprev }.
struct StageOracle {
  GameModel model;
  Polytope U, W;
  PwqFunction Vprev;
  Polytope Xprev;
  bool robust = true;  ///< constrained mode; false in the window modes

  /// Enumeration over the cells of Vprev.
  OracleResult max_at(const VectorXd& x, const VectorXd& u, const OracleConfig& cfg = {}) const;
  /// Interval of admissible scalar u at x, empty (lo > hi) if none.
  std::pair<double, double> input_interval(const VectorXd& x, const OracleConfig& cfg = {}) const;
  /// Scalar u only: grid over the admissible interval, then golden section
  /// on the bracket of the best grid point. J is evaluated by max_at.
  OracleResult min_grid(const VectorXd& x, const OracleConfig& cfg = {}) const;
};

/// Grid plus golden section for a scalar function on [lo, hi]. The function
/// must be convex on the interval for the refinement to be exact.
OracleResult grid_golden_min(const std::function<double(double)>& f, double lo, double hi,
                             const OracleConfig& cfg = {});

struct LipschitzReport {
  int pairs = 0;
  double max_ratio = 0.0;  ///< max d(u, U(x')) / |x - x'|
};

/// Sampled Lipschitz constant of x -> U(x) = {u | (x, u) in Z}. Pairs mix
/// independent samples with nearby perturbations; u in U(x) is sampled and
/// projected onto U(x') by a QP.
LipschitzReport oracle_lipschitz_U(const Polytope& Z, int param_dim, int samples,
                                   std::mt19937_64& rng, const Tolerances& tol = {});

}  // namespace hinfx
