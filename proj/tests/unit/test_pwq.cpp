#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "example_data.hpp"
#include "hinfx/errors.hpp"
#include "hinfx/pwq.hpp"

using namespace hinfx;

namespace {

PwqFunction single(const Polytope& dom, const QuadraticForm& f) {
  PwqFunction out;
  out.domain = dom;
  out.cells = {dom};
  out.pieces = {f};
  return out;
}

PwqFunction terminal_cost() {
  return single(example::Xf_ref(), {example::Pf_ref(), VectorXd::Zero(2), 0.0});
}

// |x| on [-1,1] as two affine pieces.
PwqFunction abs_function() {
  PwqFunction f;
  f.domain = Polytope::cube(1, 1.0);
  f.cells = {Polytope::box(VectorXd::Constant(1, -1), VectorXd::Zero(1)),
             Polytope::box(VectorXd::Zero(1), VectorXd::Constant(1, 1))};
  f.pieces = {{MatrixXd::Zero(1, 1), VectorXd::Constant(1, -1), 0},
              {MatrixXd::Zero(1, 1), VectorXd::Constant(1, 1), 0}};
  return f;
}

double lambda_max_2x2(const MatrixXd& P) {
  const double tr = P(0, 0) + P(1, 1);
  const double det = P(0, 0) * P(1, 1) - P(0, 1) * P(1, 0);
  return 0.5 * tr + std::sqrt(0.25 * tr * tr - det);
}

}  // namespace

TEST(Evaluate, TerminalCost) {
  auto vf = terminal_cost();
  EXPECT_EQ(evaluate(vf, VectorXd::Zero(2)), 0.0);
  EXPECT_NEAR(evaluate(vf, (VectorXd(2) << 1, 0).finished()), 10.30715, 1e-12);
}

TEST(Evaluate, SinglePieceIdentity) {
  auto f = single(Polytope::cube(2, 1.0), {MatrixXd::Identity(2, 2), VectorXd::Zero(2), 0});
  EXPECT_NEAR(evaluate(f, (VectorXd(2) << 0.5, 0.5).finished()), 0.25, 1e-15);
}

TEST(Evaluate, OutsideDomainThrows) {
  auto vf = terminal_cost();
  EXPECT_THROW(evaluate(vf, (VectorXd(2) << 5, 5).finished()), DomainError);
}

TEST(Gradient, TerminalCost) {
  auto vf = terminal_cost();
  EXPECT_NEAR(gradient(vf, VectorXd::Zero(2)).norm(), 0.0, 1e-15);
  auto g = gradient(vf, (VectorXd(2) << 1, 0).finished());
  EXPECT_NEAR(g(0), 20.6143, 1e-12);
  EXPECT_NEAR(g(1), 5.9244, 1e-12);
}

TEST(Gradient, MatchesCentralDifferences) {
  std::mt19937_64 rng(1);
  QuadraticForm f{(MatrixXd(2, 2) << 3, 1, 1, 2).finished(), (VectorXd(2) << 0.5, -1).finished(),
                  2.0};
  auto pw = single(Polytope::cube(2, 1.0), f);
  const double h = 1e-5;
  for (const auto& x : sample_uniform(pw.domain, 100, rng)) {
    VectorXd g = gradient(pw, x);
    for (int i = 0; i < 2; ++i) {
      VectorXd e = VectorXd::Zero(2);
      e(i) = h;
      const double fd = (f(x + e) - f(x - e)) / (2 * h);
      EXPECT_NEAR(g(i), fd, 1e-6 * (1 + std::abs(g(i))));
    }
  }
}

TEST(Compose, MatchesDirectEvaluation) {
  QuadraticForm f{(MatrixXd(2, 2) << 2, 1, 1, 3).finished(), (VectorXd(2) << 1, -1).finished(), 0.5};
  MatrixXd M(2, 3);
  M << 1, 2, 0, 0, 1, -1;
  VectorXd c(2);
  c << 0.3, -0.2;
  auto g = f.compose(M, c);
  VectorXd y(3);
  y << 0.1, -0.4, 0.7;
  EXPECT_NEAR(g(y), f(M * y + c), 1e-13);
}

TEST(Convexity, IdentityPiece) {
  std::mt19937_64 rng(2);
  auto f = single(Polytope::cube(2, 1.0), {MatrixXd::Identity(2, 2), VectorXd::Zero(2), 0});
  auto rep = check_convexity(f, rng);
  EXPECT_TRUE(rep.strictly_convex());
  EXPECT_NEAR(rep.min_eigenvalue, 1.0, 1e-12);
  EXPECT_GT(rep.pairs_tested, 900);
}

TEST(Convexity, SaddleFlagged) {
  std::mt19937_64 rng(3);
  auto f = single(Polytope::cube(2, 1.0),
                  {(MatrixXd(2, 2) << 1, 0, 0, -1).finished(), VectorXd::Zero(2), 0});
  auto rep = check_convexity(f, rng);
  EXPECT_FALSE(rep.convex());
  EXPECT_EQ(rep.nonconvex_pieces, 1);
}

TEST(Convexity, ConcaveKinkDetectedByMidpoints) {
  std::mt19937_64 rng(4);
  auto f = abs_function();
  for (auto& p : f.pieces) p = -p;
  EXPECT_GT(check_convexity(f, rng).midpoint_violations, 0);
}

TEST(Regularity, SinglePieceIsC1) {
  std::mt19937_64 rng(5);
  auto rep = check_regularity(terminal_cost(), rng);
  EXPECT_EQ(rep.adjacent_pairs, 0);
  EXPECT_TRUE(rep.c1(1e-5));
}

TEST(Regularity, AbsoluteValueKink) {
  std::mt19937_64 rng(6);
  auto rep = check_regularity(abs_function(), rng);
  EXPECT_EQ(rep.adjacent_pairs, 1);
  EXPECT_TRUE(rep.continuous());
  EXPECT_NEAR(rep.max_gradient_jump, 2.0, 1e-12);
  EXPECT_FALSE(rep.c1(1e-5));
}

TEST(Regularity, DiscontinuityCounted) {
  std::mt19937_64 rng(7);
  auto f = abs_function();
  f.pieces[1].s = 1.0;
  EXPECT_FALSE(check_regularity(f, rng).continuous());
}

TEST(ConcavityMargin, TerminalCost) {
  const double lmax = lambda_max_2x2(example::Pf_ref());
  EXPECT_NEAR(lmax, 24.1526, 1e-4);
  EXPECT_NEAR(check_concavity_margin(terminal_cost(), example::G(), 100.0), 1e4 - lmax, 1e-9);
  EXPECT_NEAR(check_concavity_margin(terminal_cost(), example::G(), 0.0), -lmax, 1e-9);
  EXPECT_NEAR(check_concavity_margin(terminal_cost(), MatrixXd::Zero(2, 2), 3.0), 9.0, 1e-12);
}

TEST(Canonical, OrderIsByRoundedCenter) {
  auto f = abs_function();
  std::swap(f.cells[0], f.cells[1]);
  std::swap(f.pieces[0], f.pieces[1]);
  f.canonicalize();
  EXPECT_LT(f.cells[0].chebyshev_center()(0), 0.0);
  EXPECT_EQ(f.pieces[0].q(0), -1.0);
}
