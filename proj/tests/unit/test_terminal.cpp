#include <gtest/gtest.h>

#include <random>

#include "brute.hpp"
#include "example_data.hpp"
#include "hinfx/errors.hpp"
#include "hinfx/terminal.hpp"

using namespace hinfx;

namespace {

GameModel example_model() {
  return {example::A(), example::B(), example::G(), example::Q(), example::R(), example::kGamma};
}

// Largest entry of the discrete algebraic Riccati residual of the LQR problem.
double dare_residual(const MatrixXd& A, const MatrixXd& B, const MatrixXd& Q, const MatrixXd& R,
                     const MatrixXd& P) {
  const MatrixXd S = R + B.transpose() * P * B;
  const MatrixXd res = A.transpose() * P * A - P -
                       A.transpose() * P * B * S.ldlt().solve(B.transpose() * P * A) + Q;
  return res.cwiseAbs().maxCoeff();
}

}  // namespace

TEST(Riccati, ExampleMatchesReferenceMatrix) {
  const auto sol = solve_hinf_riccati(example_model());
  EXPECT_LE((sol.P - example::Pf_ref()).cwiseAbs().maxCoeff(), 5e-4);
  EXPECT_NEAR(sol.P(0, 1), sol.P(1, 0), 1e-12);
}

TEST(Riccati, ZeroDisturbanceGainReducesToLqr) {
  GameModel g = example_model();
  g.G = MatrixXd::Zero(2, 1);
  const auto sol = solve_hinf_riccati(g);
  EXPECT_LE(dare_residual(g.A, g.B, g.Q, g.R, sol.P), 1e-8);
  EXPECT_LE(sol.Kw.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Riccati, ScalarNotStabilizable) {
  GameModel g{MatrixXd::Constant(1, 1, 2.0), MatrixXd::Zero(1, 1), MatrixXd::Identity(1, 1),
              MatrixXd::Identity(1, 1), MatrixXd::Identity(1, 1), 10.0};
  EXPECT_THROW(solve_hinf_riccati(g), NotStabilizableError);
  EXPECT_FALSE(is_stabilizable(g.A, g.B));
}

TEST(Riccati, SmallGammaInfeasible) {
  GameModel g = example_model();
  g.gamma = 1.0;
  EXPECT_THROW(solve_hinf_riccati(g), GammaInfeasibleError);
}

TEST(Riccati, DisturbanceGainShrinksWithGamma) {
  GameModel g = example_model();
  const double k1 = solve_hinf_riccati(g).Kw.norm();
  g.gamma *= 10.0;
  const double k10 = solve_hinf_riccati(g).Kw.norm();
  EXPECT_LT(k10, k1);
  EXPECT_GT(k1, 0.0);
}

TEST(Riccati, GammaThresholdBracketsFeasibility) {
  const double t = gamma_threshold(example_model(), 1.0, 100.0, 1e-3);
  GameModel g = example_model();
  g.gamma = t * 1.01;
  EXPECT_NO_THROW(solve_hinf_riccati(g));
  g.gamma = t * 0.95;
  EXPECT_THROW(solve_hinf_riccati(g), GammaInfeasibleError);
}

TEST(FakeHjb, ExamplePairIsFixedPoint) {
  const auto g = example_model();
  const auto pair = synthesize_terminal(g, example::X(), example::U(), example::W());
  std::mt19937_64 rng(3);
  EXPECT_LE(verify_fake_hjb(g, pair, rng), 1e-8);
  EXPECT_LT(spectral_radius(pair.Af), 1.0 - 1e-9);
  EXPECT_LT(spectral_radius(pair.Ac), 1.0 - 1e-9);
}

TEST(FakeHjb, SensitiveToPerturbation) {
  const auto g = example_model();
  auto pair = synthesize_terminal(g, example::X(), example::U(), example::W());
  pair.P += 1e-3 * MatrixXd::Identity(2, 2);
  std::mt19937_64 rng(3);
  EXPECT_GT(verify_fake_hjb(g, pair, rng), 1e-4);
}

TEST(TerminalSet, ComputedSetPassesVertexChecks) {
  const auto g = example_model();
  const auto pair = synthesize_terminal(g, example::X(), example::U(), example::W());
  const auto rep = check_terminal_set(g, pair.Ku, pair.Kw, pair.Xf, example::X(), example::U(),
                                      example::W());
  EXPECT_TRUE(rep.ok()) << rep.worst_slack;
  // Independent check of the invariance with brute-force vertices.
  for (const auto& v : brute::vertices(pair.Xf.H(), pair.Xf.h()))
    for (const auto& w : brute::vertices(example::W().H(), example::W().h()))
      EXPECT_LE(pair.Xf.max_violation(pair.Af * v + g.G * w), 1e-8);
}

TEST(TerminalSet, ReferenceSetPassesVertexChecks) {
  const auto g = example_model();
  const auto sol = solve_hinf_riccati(g);
  // Rows are rounded to 4 decimals, so allow a few units in the last digit.
  const auto rep = check_terminal_set(g, sol.Ku, sol.Kw, example::Xf_ref(), example::X(),
                                      example::U(), example::W(), 5e-4);
  EXPECT_TRUE(rep.ok()) << rep.worst_slack;
}

TEST(TerminalSet, ComputedSetCloseToReference) {
  const auto pair =
      synthesize_terminal(example_model(), example::X(), example::U(), example::W());
  // Both descriptions contain each other up to the 4-digit printing.
  const auto rounded = example::Xf_ref();
  for (const auto& v : vertices(pair.Xf)) EXPECT_LE(rounded.max_violation(v), 5e-3);
  for (const auto& v : vertices(rounded)) EXPECT_LE(pair.Xf.max_violation(v), 5e-3);
}

TEST(TerminalSet, NominalCaseIsInputSeedClosedUnderDynamics) {
  GameModel g = example_model();
  g.G = MatrixXd::Zero(2, 1);
  const auto sol = solve_hinf_riccati(g);
  const MatrixXd Af = g.A + g.B * sol.Ku;
  const Polytope bigX = Polytope::cube(2, 1e3);
  const Polytope Xf =
      compute_terminal_set(g, sol.Ku, sol.Kw, bigX, example::U(), Polytope::cube(1, 1.0));
  // Without disturbances the set is the maximal invariant set under Af of
  // {|Ku x| <= 1}: every point stays admissible along its orbit.
  std::mt19937_64 rng(1);
  for (const auto& x0 : sample_uniform(Xf, 200, rng)) {
    VectorXd x = x0;
    for (int k = 0; k < 50; ++k) {
      EXPECT_LE(std::abs((sol.Ku * x)(0)), 1.0 + 1e-8);
      x = Af * x;
    }
  }
  // And points just outside leave the input bound at some step.
  for (const auto& v : vertices(Xf)) {
    VectorXd x = 1.01 * v;
    bool left = false;
    for (int k = 0; k < 200 && !left; ++k) {
      left = std::abs((sol.Ku * x)(0)) > 1.0;
      x = Af * x;
    }
    EXPECT_TRUE(left);
  }
}

TEST(TerminalSet, SmallerDisturbanceGivesLargerSet) {
  const auto g = example_model();
  const auto full = synthesize_terminal(g, example::X(), example::U(), example::W());
  const auto half = synthesize_terminal(g, example::X(), example::U(), Polytope::cube(2, 0.05));
  EXPECT_TRUE(is_subset(full.Xf, half.Xf));
  EXPECT_FALSE(is_subset(half.Xf, full.Xf));
}

TEST(TerminalSet, OversizedDisturbanceRejected) {
  const auto g = example_model();
  const auto sol = solve_hinf_riccati(g);
  EXPECT_THROW(compute_terminal_set(g, sol.Ku, sol.Kw, example::X(), example::U(),
                                    Polytope::cube(2, 5.0)),
               InfeasibleError);
}
