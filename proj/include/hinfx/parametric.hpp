#pragma once

#include <optional>
#include <vector>

#include "hinfx/config.hpp"
#include "hinfx/geometry.hpp"
#include "hinfx/pwq.hpp"

namespace hinfx {

enum class Mode { Min, Max };

/// Optimize a piecewise-quadratic objective over the decision part of the
/// joint variable (theta, v), for every parameter theta in `domain`.
///
/// objective: cells and pieces over the joint space (param_dim + decision dims).
/// constraint: joint feasible set intersected with every cell.
/// domain: parameter set where the solution is wanted.
struct ParametricProblem {
  PwqFunction objective;
  Polytope constraint;
  Polytope domain;
  int param_dim = 0;
  Mode mode = Mode::Min;

  int decision_dim() const { return objective.dim() - param_dim; }
};

/// Cell rows written as M v <= N theta + p. Rows whose decision part has norm
/// at most 1e-9 only restrict the parameter.
struct PieceConstraintForm {
  MatrixXd M;
  MatrixXd N;
  VectorXd p;
  std::vector<int> decision_rows;
  std::vector<int> parameter_rows;

  int rows() const { return static_cast<int>(p.size()); }
};

PieceConstraintForm split_constraints(const Polytope& joint, int param_dim, double tol = 1e-9);

/// Parametric solution of the equality-constrained problem on active set I.
/// Multipliers follow grad + M_I' lambda = 0 with lambda >= 0 for the
/// minimization; in Max mode the piece is negated first.
struct EqualityQpSolution {
  QuadraticForm value;      ///< optimal value in theta (original sign)
  AffineLaw law;            ///< optimizer v(theta)
  AffineLaw multipliers;    ///< lambda(theta), one row per member of I
};

/// Throws DegenerateActiveSetError if M_I is rank deficient and ModeError if
/// the decision block is not definite with the right sign.
EqualityQpSolution solve_equality_qp_parametric(const QuadraticForm& piece,
                                                const PieceConstraintForm& form,
                                                const std::vector<int>& I, int param_dim,
                                                Mode mode, const Tolerances& tol = {});

struct CriticalRegion {
  int cell = -1;
  std::vector<int> active;
  Polytope region;
  AffineLaw law;
  QuadraticForm value;
  AffineLaw multipliers;
};

/// Region where active set I of `cell` stays optimal: inactive rows hold,
/// multipliers are nonnegative, parameter-only rows hold, theta in domain.
CriticalRegion build_critical_region(int cell, const std::vector<int>& I,
                                     const PieceConstraintForm& form,
                                     const EqualityQpSolution& eq, const Polytope& domain,
                                     const Tolerances& tol = {});

struct PointwiseSolution {
  VectorXd optimizer;
  double value = 0.0;
  std::vector<int> cells;               ///< cells containing (theta, v*)
  std::vector<std::vector<int>> active; ///< per cell in `cells`, active rows of its form
};

struct MarriedRegion {
  VectorXd seed;
  std::vector<int> cells;
  std::vector<std::vector<int>> active;
  Polytope region;
  AffineLaw law;
  QuadraticForm value;
};

struct ExploreOptions {
  Tolerances tol;
  Budgets budgets;
  std::uint64_t seed = kDefaultSeed;
  /// Run the sampled convexity test on the objective before exploring.
  bool check_preconditions = true;
  /// Split interior overlaps between regions (see resolve_overlaps). When
  /// off, overlaps are only counted.
  bool resolve_overlaps = true;
};

struct ExploreStats {
  int seeds = 0;
  int failed_seeds = 0;
  int duplicate_regions = 0;
  int flat_regions = 0;
  int facet_tasks = 0;
  int coverage_restarts = 0;
  double uncovered_fraction = 0.0;
  int explored_regions = 0;   ///< regions found before overlap resolution
  int overlapping_pairs = 0;  ///< interior overlaps that had to be split
};

struct ParametricSolution {
  PwqFunction value;
  PiecewiseAffineLaw law;
  std::vector<MarriedRegion> regions;
  Polytope domain;
  ExploreStats stats;
  /// Region count after merging adjacent regions with identical laws.
  int merged_count = 0;
};

/// Splits interior overlaps between regions. Overlaps appear when the
/// objective is only piecewise concave (Max) or convex (Min) and several
/// local optima coexist; each part of an overlap goes to the better branch,
/// with the branch boundary linearized. Returns the number of split pairs.
int resolve_overlaps(std::vector<MarriedRegion>& regions, Mode mode, const Tolerances& tol = {});

/// Precomputed cell data shared by the pointwise and region builders.
class ParametricSolver {
 public:
  ParametricSolver(ParametricProblem problem, ExploreOptions options = {});

  const ParametricProblem& problem() const { return problem_; }
  int cells() const { return static_cast<int>(forms_.size()); }
  const PieceConstraintForm& form(int cell) const { return forms_[cell]; }
  const Polytope& feasible_cell(int cell) const { return joint_cells_[cell]; }
  bool cell_usable(int cell) const { return usable_[cell]; }

  /// Exact pointwise solve. `activity` is the slack threshold (scaled by
  /// 1 + |rhs|) used for the active cell and row sets.
  PointwiseSolution pointwise(const VectorXd& theta, double activity) const;

  /// Married region through theta, or nullopt when no consistent region
  /// containing theta could be built.
  std::optional<MarriedRegion> region_at(const VectorXd& theta) const;

  ParametricSolution explore() const;

 private:
  std::optional<MarriedRegion> marry(const VectorXd& theta, const PointwiseSolution& pw,
                                     bool enumerate) const;

  ParametricProblem problem_;
  ExploreOptions options_;
  std::vector<Polytope> joint_cells_;
  std::vector<PieceConstraintForm> forms_;
  std::vector<bool> usable_;
  std::vector<std::vector<bool>> boundary_rows_;  ///< rows not taken from the constraint
};

PointwiseSolution pointwise_minmax(const ParametricProblem& problem, const VectorXd& theta,
                                   const Tolerances& tol = {});

ParametricSolution explore(const ParametricProblem& problem, const ExploreOptions& options = {});

}  // namespace hinfx
