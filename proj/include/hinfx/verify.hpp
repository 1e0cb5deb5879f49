#pragma once

#include <random>
#include <string>
#include <vector>

#include "hinfx/oracle.hpp"
#include "hinfx/rhc.hpp"

namespace hinfx {

struct CheckLine {
  std::string name;
  bool pass = true;
  double value = 0.0;
  std::string detail;
};

struct SuiteReport {
  std::vector<CheckLine> lines;
  bool ok() const;
  int failures() const;
  void add(std::string name, bool pass, double value, std::string detail = {});
  void append(const SuiteReport& other);
  /// "PASS|FAIL <name> <value> <detail>" per line.
  std::string text() const;
};

SuiteReport terminal_suite(const GameModel& model, const TerminalPair& pair, const Polytope& X,
                           const Polytope& U, const Polytope& W, std::mt19937_64& rng,
                           const Tolerances& tol = {});

struct StageSuiteOptions {
  int samples = 100;
  double monotone_tol = 1e-8;
  double terminal_tol = 1e-6;
  double stationary_tol = 1e-7;
};

/// Regularity of every stage, set recursion, invariance of X_j, and the
/// mode-specific properties (monotonicity and terminal consistency in the
/// constrained mode, X*_j checks in the restricted mode).
SuiteReport stage_suite(const ProblemSpec& spec, const std::vector<StageResult>& stages,
                        const MatrixXd& Ku, std::mt19937_64& rng,
                        const StageSuiteOptions& opt = {});

struct OracleSuiteOptions {
  int samples = 50;
  double grid_tol = 1e-5;
  double enum_tol = 1e-7;
  double optimizer_tol = 1e-4;
  OracleConfig config;
};

/// Parametric values and laws against brute-force solutions at random
/// parameters of every stage.
SuiteReport oracle_suite(const ProblemSpec& spec, const std::vector<StageResult>& stages,
                         std::mt19937_64& rng, const OracleSuiteOptions& opt = {});

struct ClosedLoopOptions {
  int rollouts = 1000;
  int rollout_steps = 30;
  int bursts = 100;
  int burst_max_length = 10;
  int settle_steps = 300;
  double slack_tol = 1e-7;
  double descent_tol = 1e-7;
};

/// Robust invariance of X_N, finite-gain certificates and zero-disturbance
/// descent (constrained mode); attraction to X_f (restricted mode).
SuiteReport closed_loop_suite(const ProblemSpec& spec, const std::vector<StageResult>& stages,
                              std::mt19937_64& rng, const ClosedLoopOptions& opt = {});

}  // namespace hinfx
