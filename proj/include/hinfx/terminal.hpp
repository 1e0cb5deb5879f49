#pragma once

#include <random>

#include "hinfx/config.hpp"
#include "hinfx/geometry.hpp"

namespace hinfx {

/// x+ = A x + B u + G w with stage cost
/// 1/2 x'Qx + 1/2 u'Ru - gamma^2/2 |w|^2.
struct GameModel {
  MatrixXd A, B, G, Q, R;
  double gamma = 0.0;

  int n() const { return static_cast<int>(A.rows()); }
  int m() const { return static_cast<int>(B.cols()); }
  int p() const { return static_cast<int>(G.cols()); }

  VectorXd step(const VectorXd& x, const VectorXd& u, const VectorXd& w) const {
    return A * x + B * u + G * w;
  }
  double stage_cost(const VectorXd& x, const VectorXd& u, const VectorXd& w) const {
    return 0.5 * x.dot(Q * x) + 0.5 * u.dot(R * u) - 0.5 * gamma * gamma * w.squaredNorm();
  }
  /// Throws InputError on inconsistent shapes or indefinite weights.
  void validate() const;
};

struct RiccatiOptions {
  double tolerance = 1e-11;  ///< Frobenius step size that counts as converged
  int max_iterations = 100000;
};

struct RiccatiSolution {
  MatrixXd P;
  MatrixXd Ku;
  MatrixXd Kw;
  int iterations = 0;
};

/// Value iteration P <- Q + A'PA - A'PE S^-1 E'PA with E = [B G] and
/// S = blockdiag(R, -gamma^2 I) + E'PE, started at P = Q.
/// Throws NotStabilizableError if (A, B) fails the PBH test or the iterates
/// diverge, GammaInfeasibleError if gamma^2 I - G'PG stops being positive
/// definite or the iteration does not converge.
RiccatiSolution solve_hinf_riccati(const GameModel& model, const RiccatiOptions& opt = {});

/// PBH rank test on every eigenvalue with modulus >= 1.
bool is_stabilizable(const MatrixXd& A, const MatrixXd& B, double tol = 1e-9);

double spectral_radius(const MatrixXd& M);

struct TerminalPair {
  MatrixXd P;
  MatrixXd Ku;
  MatrixXd Kw;
  MatrixXd Af;  ///< A + B Ku
  MatrixXd Ac;  ///< A + B Ku + G Kw
  Polytope Xf;
  double gamma = 0.0;
};

/// Max over `samples` random unit x of
/// |V(Ac x) - V(x) + l(x, Ku x, Kw x)| with V(x) = 1/2 x'Px.
double verify_fake_hjb(const GameModel& model, const TerminalPair& pair, std::mt19937_64& rng,
                       int samples = 100);

/// Largest set found by Omega_{k+1} = Omega_k cap {x | Af x in Omega_k (-) GW}
/// from Omega_0 = X cap {x | Kw x in W} cap {x | Ku x in U}.
/// Throws InfeasibleError when the iteration empties the set or hits the cap.
Polytope compute_terminal_set(const GameModel& model, const MatrixXd& Ku, const MatrixXd& Kw,
                              const Polytope& X, const Polytope& U, const Polytope& W,
                              const Tolerances& tol = {}, int max_iterations = 500);

/// Riccati solution plus terminal set in one call.
TerminalPair synthesize_terminal(const GameModel& model, const Polytope& X, const Polytope& U,
                                 const Polytope& W, const Tolerances& tol = {});

/// Vertex checks of the terminal conditions (dimension <= 4).
struct TerminalReport {
  int invariance_violations = 0;  ///< Af v + G w outside Xf, v and w vertices
  int input_violations = 0;       ///< Ku v outside U
  int disturbance_violations = 0; ///< Kw v outside W
  int containment_violations = 0; ///< v outside X
  double worst_slack = 0.0;       ///< largest constraint excess seen
  bool ok() const {
    return invariance_violations == 0 && input_violations == 0 && disturbance_violations == 0 &&
           containment_violations == 0;
  }
};
TerminalReport check_terminal_set(const GameModel& model, const MatrixXd& Ku, const MatrixXd& Kw,
                                  const Polytope& Xf, const Polytope& X, const Polytope& U,
                                  const Polytope& W, double tol = Tolerances{}.feas);

/// Smallest gamma in [lo, hi] (within rel_tol) at which the Riccati
/// iteration succeeds. Throws GammaInfeasibleError if hi fails.
double gamma_threshold(GameModel model, double lo, double hi, double rel_tol = 1e-4);

}  // namespace hinfx
