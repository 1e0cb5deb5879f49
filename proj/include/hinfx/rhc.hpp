#pragma once

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "hinfx/dp.hpp"

namespace hinfx {

enum class DisturbanceKind {
  Zero,
  Worst,      ///< vertex of W maximizing V_N at the successor
  Random,     ///< uniform in W
  Adversary,  ///< the maximizer nu of the last stage
  Sequence,   ///< user supplied, zero once exhausted
};

struct DisturbanceSource {
  DisturbanceKind kind = DisturbanceKind::Zero;
  std::vector<VectorXd> sequence;
  std::uint64_t seed = kDefaultSeed;
};

/// Receding-horizon controller: the first law kappa_N and its value V_N on X_N.
struct ClosedLoop {
  GameModel model;
  Polytope W;
  Polytope XN;
  PwqFunction VN;
  PiecewiseAffineLaw kappaN;
  std::optional<PiecewiseAffineLaw> nu;  ///< maximizer of the last stage, on Z

  /// From the last element of a recursion.
  static ClosedLoop from_stages(const ProblemSpec& spec, const std::vector<StageResult>& stages);
};

struct Trajectory {
  std::vector<VectorXd> x;  ///< steps + 1 states
  std::vector<VectorXd> u, w, y;
  std::vector<double> cost;   ///< l(x(i), u(i), w(i))
  std::vector<double> value;  ///< V_N(x(i)), steps + 1 entries
  int steps() const { return static_cast<int>(u.size()); }
  /// max_i |x(i+1) - A x(i) - B u(i) - G w(i)|
  double dynamics_residual(const GameModel& g) const;
};

/// Output with |y|^2 = x'Qx + u'Ru (Cholesky factors of Q and R).
VectorXd output(const GameModel& g, const VectorXd& x, const VectorXd& u);

/// Closed loop x+ = A x + B kappa_N(x) + G w. Throws CertificateViolation
/// naming the step if a state leaves X_N, DomainError if x0 is outside X_N.
Trajectory simulate(const ClosedLoop& loop, const VectorXd& x0, const DisturbanceSource& source,
                    int steps, const Tolerances& tol = {});

/// Disturbance chosen by `source` at step i for the state x and input u.
VectorXd pick_disturbance(const ClosedLoop& loop, const DisturbanceSource& source, int i,
                          const VectorXd& x, const VectorXd& u, std::mt19937_64& rng,
                          const Tolerances& tol = {});

/// Dissipation inequality summed along a trajectory, written with the stage
/// cost:  sum 1/2 |y|^2  <=  gamma^2/2 sum |w|^2 + V_N(x0).
struct GainCertificate {
  double output_energy = 0.0;       ///< sum 1/2 |y(i)|^2
  double disturbance_energy = 0.0;  ///< gamma^2/2 sum |w(i)|^2
  double initial_value = 0.0;       ///< V_N(x0)
  double slack = 0.0;               ///< right side minus left side
  bool settled = false;             ///< |x(end)| <= 1e-6
  static constexpr const char* kConvention =
      "sum 1/2 |y|^2 <= gamma^2/2 sum |w|^2 + V_N(x0), |y|^2 = x'Qx + u'Ru";
};
GainCertificate finite_gain_certificate(const GameModel& g, const Trajectory& t);

/// max_i [V_N(x(i+1)) - V_N(x(i)) + l(x(i), u(i), w(i))]; nonpositive when
/// V_N decreases at least by the stage cost.
double worst_descent(const GameModel& g, const Trajectory& t);

struct AttractionReport {
  int runs = 0;
  int failures = 0;
  int max_steps_to_enter = 0;
  std::vector<VectorXd> counterexample;  ///< states of the first failing run
  bool ok() const { return failures == 0; }
};

/// From random points of X*_N and random vertex disturbances, the receding
/// horizon loop must reach X_f within N steps and stay there for `tail` more.
AttractionReport attraction_check(const ProblemSpec& spec, const std::vector<StageResult>& stages,
                                  std::mt19937_64& rng, int runs = 100, int tail = 10);

/// Uniform-ish sample of a union: a member chosen with probability
/// proportional to its Chebyshev radius^n, then a uniform point inside it.
VectorXd sample_union(const std::vector<Polytope>& sets, std::mt19937_64& rng,
                      const Tolerances& tol = {});

/// "i,x1..xn,u..,w..,y..,l,V" rows with a header line.
std::string trajectory_csv(const Trajectory& t);

}  // namespace hinfx
