#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "hinfx/parametric.hpp"
#include "hinfx/pwq.hpp"
#include "hinfx/terminal.hpp"

namespace hinfx {

enum class DpMode {
  Constrained,  ///< state, control and terminal constraints
  ControlOnly,  ///< control constraints only, computed on a bounded window
  Restricted,   ///< control-only recursion plus the sets X*_j
};

/// Parameter set of the inner maximization.
enum class MaxDomain {
  Projection,  ///< Proj_Z Phi: every (x, u) with some admissible w
  Robust,      ///< Z_{j-1}: every (x, u) whose successors all lie in X_{j-1}
};

struct ProblemSpec {
  GameModel model;
  Polytope X, U, W;
  int N = 0;
  MatrixXd Pf;
  Polytope Xf;
  DpMode mode = DpMode::Constrained;
  MaxDomain max_domain = MaxDomain::Robust;
  /// Working window for the control-only and restricted modes. When unset,
  /// the bounding box of Xf scaled by 2 max(N, 1) is used.
  std::optional<Polytope> window;
  Tolerances tol;
  Budgets budgets;
  std::uint64_t seed = kDefaultSeed;
  /// Run the sampled regularity checks after every stage.
  bool validate_stages = true;
  /// Forwarded to the parametric explorer.
  bool resolve_overlaps = true;

  /// Throws InputError naming the first violated requirement.
  void validate() const;
  Polytope working_window() const;
};

struct StageChecks {
  RegularityReport value_regularity;
  ConvexityReport value_convexity;
  double law_gap = 0.0;            ///< max law jump across shared facets
  double concavity_margin = 0.0;   ///< min eigenvalue of gamma^2 I - G'Q_i G over V_{j-1}
  RegularityReport cost_regularity;  ///< of J_{j-1}
  PartitionReport value_partition;
  bool ok(const Tolerances& tol) const {
    return value_regularity.continuous() && value_convexity.strictly_convex(tol.pd) &&
           law_gap <= tol.cont && concavity_margin > 0.0 && value_partition.ok();
  }
};

/// Stage j (time to go): V_j and kappa_j on X_j, and the J_{j-1}, nu_{j-1}
/// pair on Z_{j-1} that produced them.
struct StageResult {
  int j = 0;
  PwqFunction V;
  PiecewiseAffineLaw kappa;
  PwqFunction J;
  PiecewiseAffineLaw nu;
  Polytope Xj;
  Polytope Zj;            ///< parameter set of J_{j-1}
  Polytope Phi;           ///< joint (x, u, w) set of the maximization
  Polytope feasible_xu;   ///< constraint set of the minimization
  std::vector<Polytope> XjStar;
  ExploreStats max_stats, min_stats;
  int x_regions = 0, z_regions = 0;
  int x_merged = 0, z_merged = 0;
  int x_explored = 0, z_explored = 0;  ///< before overlap resolution
  std::optional<StageChecks> checks;
};

/// The maximization data of one stage, exposed for oracles.
struct MaxStageProblem {
  ParametricProblem problem;
  Polytope Phi;
};
MaxStageProblem build_max_problem(const ProblemSpec& spec, const PwqFunction& Vprev,
                                  const Polytope& Xprev, const Polytope& Xnext);

struct MinStageProblem {
  ParametricProblem problem;
  Polytope feasible_xu;
};
MinStageProblem build_min_problem(const ProblemSpec& spec, const PwqFunction& J,
                                  const Polytope& Xprev, const Polytope& Xnext);

/// Next state set: constrained mode projects Z_{j-1}; the window modes keep
/// every successor inside X_{j-1} for all inputs in U.
Polytope next_state_set(const ProblemSpec& spec, const Polytope& Xprev);

/// Cost and law of the maximization at stage j, on Z_{j-1}.
ParametricSolution stage_max(const ProblemSpec& spec, const PwqFunction& Vprev,
                             const Polytope& Xprev, const Polytope& Xnext);
/// Value and law of the minimization at stage j, on X_j.
ParametricSolution stage_min(const ProblemSpec& spec, const PwqFunction& J, const Polytope& Xprev,
                             const Polytope& Xnext);

/// V_0 = Vf on X_0 (Xf, or the window in the window modes).
StageResult boundary_stage(const ProblemSpec& spec);

/// Stages 0..N. `on_stage` is called after each stage is complete.
std::vector<StageResult> run_recursion(
    const ProblemSpec& spec, const std::function<void(const StageResult&)>& on_stage = {});

/// Pieces of {x in cell | (A + B K)x + B k + G W inside one previous piece}
/// over every cell of kappa.
std::vector<Polytope> restricted_set(const ProblemSpec& spec, const PiecewiseAffineLaw& kappa,
                                     const std::vector<Polytope>& previous);

bool in_union(const std::vector<Polytope>& sets, const VectorXd& x, double tol = Tolerances{}.feas);

StageChecks check_stage(const ProblemSpec& spec, const StageResult& stage, const PwqFunction& Vprev,
                        std::mt19937_64& rng);

}  // namespace hinfx
