#pragma once

#include <optional>
#include <string>

#include "hinfx/dp.hpp"

namespace hinfx {

/// Halfspace rows exactly as written in a problem file (not normalized).
struct RowSet {
  MatrixXd H;
  VectorXd h;
  Polytope polytope(const Tolerances& tol = {}) const { return Polytope(H, h, tol); }
  static RowSet of(const Polytope& p) { return {p.H(), p.h()}; }
  bool operator==(const RowSet& o) const;
};

enum class TerminalSource { Compute, Given };

/// Parsed problem file. Sections: system {A, B, G}, cost {Q, R, gamma},
/// sets {X, U, W}, horizon {N}, terminal {mode, Pf, Xf}, options {mode,
/// max_domain, resolve_overlaps, seed, window, tolerances}.
///
/// Sets are lists of "a_1 ... a_d | b" strings or {cube: r}.
struct SpecFile {
  MatrixXd A, B, G, Q, R;
  double gamma = 0.0;
  RowSet X, U, W;
  int N = 0;
  TerminalSource terminal = TerminalSource::Compute;
  MatrixXd Pf;  ///< given mode only
  RowSet Xf;    ///< given mode only
  DpMode mode = DpMode::Constrained;
  MaxDomain max_domain = MaxDomain::Robust;
  bool resolve_overlaps = true;
  std::uint64_t seed = kDefaultSeed;
  std::optional<RowSet> window;
  Tolerances tol;

  bool operator==(const SpecFile& o) const;

  GameModel model() const { return {A, B, G, Q, R, gamma}; }
  /// Builds the problem; in compute mode the terminal pair is synthesized
  /// first and also returned through `pair` when given.
  ProblemSpec problem(TerminalPair* pair = nullptr) const;
};

/// Throws InputError "<source>:<line>: <what>" on any syntax or content error.
SpecFile parse_spec(const std::string& text, const std::string& source = "<spec>");
SpecFile load_spec(const std::string& path);
std::string serialize_spec(const SpecFile& s);

const char* to_string(DpMode m);
const char* to_string(MaxDomain m);

}  // namespace hinfx
