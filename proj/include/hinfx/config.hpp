#pragma once

#include <cstdint>

namespace hinfx {

/// Numerical tolerances shared by every module. All are overridable from the
/// problem file or the command line.
struct Tolerances {
  double feas = 1e-8;        ///< primal feasibility / containment slack
  double kkt = 1e-8;         ///< stationarity and complementarity residual
  double act = 1e-6;         ///< constraint activation threshold
  double pd = 1e-10;         ///< minimum eigenvalue for "positive definite"
  double interior = 1e-7;    ///< Chebyshev radius below which a set is flat
  double step = 1e-6;        ///< outward step across a region facet
  double redundancy = 1e-9;  ///< slack for redundant-row detection
  double dedup = 1e-8;       ///< row-wise match for identical regions
  double cont = 1e-6;        ///< continuity across facets, relative
  double c1 = 1e-5;          ///< gradient jump classified as C1
};

/// Sampling budgets for the randomized regularity and coverage checks.
struct Budgets {
  int facet_samples = 20;
  int coverage_samples = 10000;
  int convexity_pairs = 1000;
  int membership_samples = 1000;
  int max_regions = 20000;
  int max_facet_tasks = 200000;
  int max_coverage_restarts = 200;
};

inline constexpr std::uint64_t kDefaultSeed = 12345;

}  // namespace hinfx
