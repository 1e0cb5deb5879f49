#include <gtest/gtest.h>

#include <random>

#include "hinfx/errors.hpp"
#include "hinfx/optbase.hpp"

using namespace hinfx;

namespace {

MatrixXd mat(int r, int c, std::initializer_list<double> v) {
  MatrixXd M(r, c);
  auto it = v.begin();
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) M(i, j) = *it++;
  return M;
}

VectorXd vec(std::initializer_list<double> v) {
  VectorXd x(static_cast<Eigen::Index>(v.size()));
  int i = 0;
  for (double d : v) x(i++) = d;
  return x;
}

LpProblem lp(VectorXd c, MatrixXd A, VectorXd b) {
  return {std::move(c), std::move(A), std::move(b), MatrixXd(0, 0), VectorXd(0)};
}

QpProblem qp(MatrixXd P, VectorXd q, MatrixXd A, VectorXd b) {
  return {std::move(P), std::move(q), std::move(A), std::move(b), MatrixXd(0, 0), VectorXd(0)};
}

// Brute force over every active subset: the independent QP oracle.
double qp_enumeration(const MatrixXd& P, const VectorXd& q, const MatrixXd& A, const VectorXd& b,
                      VectorXd& best_x) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(P.rows());
  double best = std::numeric_limits<double>::infinity();
  for (int mask = 0; mask < (1 << m); ++mask) {
    std::vector<int> act;
    for (int i = 0; i < m; ++i)
      if (mask & (1 << i)) act.push_back(i);
    const int k = static_cast<int>(act.size());
    MatrixXd K = MatrixXd::Zero(n + k, n + k);
    VectorXd r(n + k);
    K.topLeftCorner(n, n) = P;
    r.head(n) = -q;
    for (int j = 0; j < k; ++j) {
      K.block(0, n + j, n, 1) = A.row(act[j]).transpose();
      K.block(n + j, 0, 1, n) = A.row(act[j]);
      r(n + j) = b(act[j]);
    }
    Eigen::FullPivLU<MatrixXd> lu(K);
    if (lu.rank() < n + k) continue;
    VectorXd s = lu.solve(r);
    VectorXd x = s.head(n);
    if ((A * x - b).maxCoeff() > 1e-9) continue;
    if (k > 0 && s.tail(k).minCoeff() < -1e-9) continue;
    const double v = 0.5 * x.dot(P * x) + q.dot(x);
    if (v < best) {
      best = v;
      best_x = x;
    }
  }
  return best;
}

}  // namespace

TEST(SolveLp, BoxMinimum) {
  auto s = solve_lp(lp(vec({1}), mat(2, 1, {1, -1}), vec({1, 0})));
  ASSERT_TRUE(s.optimal());
  EXPECT_NEAR(s.x(0), 0.0, 1e-12);
  EXPECT_NEAR(s.value, 0.0, 1e-12);
}

TEST(SolveLp, SingleActiveUpperBound) {
  auto s = solve_lp(lp(vec({-1}), mat(1, 1, {1}), vec({1})));
  ASSERT_TRUE(s.optimal());
  EXPECT_NEAR(s.x(0), 1.0, 1e-12);
  EXPECT_NEAR(s.value, -1.0, 1e-12);
}

TEST(SolveLp, ContradictoryBoundsInfeasible) {
  auto s = solve_lp(lp(vec({0}), mat(2, 1, {1, -1}), vec({-1, -1})));
  EXPECT_EQ(s.status, SolveStatus::Infeasible);
}

TEST(SolveLp, UnboundedDetected) {
  auto s = solve_lp(lp(vec({-1}), mat(1, 1, {-1}), vec({0})));
  EXPECT_EQ(s.status, SolveStatus::Unbounded);
}

TEST(SolveLp, DimensionMismatchThrows) {
  EXPECT_THROW(solve_lp(lp(vec({1, 2}), mat(1, 1, {1}), vec({1}))), InputError);
}

TEST(SolveLp, EqualityConstraints) {
  LpProblem p{vec({1, 1}), mat(2, 2, {-1, 0, 0, -1}), vec({0, 0}), mat(1, 2, {1, 2}), vec({2})};
  auto s = solve_lp(p);
  ASSERT_TRUE(s.optimal());
  EXPECT_NEAR(s.value, 1.0, 1e-10);
  EXPECT_NEAR(s.x(1), 1.0, 1e-10);
}

TEST(SolveLp, StrongDualityOnRandomProblems) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 3;
    const int m = 2 * n + 3;
    MatrixXd A(m, n);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) A(i, j) = u(rng);
    // Bounding box rows keep the LP bounded; feasible at the origin.
    MatrixXd Ab(m + 2 * n, n);
    Ab << A, MatrixXd::Identity(n, n), -MatrixXd::Identity(n, n);
    VectorXd b(m + 2 * n);
    for (int i = 0; i < m; ++i) b(i) = 0.5 + u(rng) * 0.4;
    b.tail(2 * n).setConstant(3.0);
    VectorXd c(n);
    for (int j = 0; j < n; ++j) c(j) = u(rng);
    auto s = solve_lp(lp(c, Ab, b));
    ASSERT_TRUE(s.optimal());
    EXPECT_LE((Ab * s.x - b).maxCoeff(), 1e-8);
    EXPECT_GE(s.lambda.minCoeff(), 0.0);
    EXPECT_LE((c + Ab.transpose() * s.lambda).cwiseAbs().maxCoeff(), 1e-8);
    const double dual = -b.dot(s.lambda);
    EXPECT_NEAR(s.value, dual, 1e-7);
  }
}

TEST(SolveLp, Deterministic) {
  auto p = lp(vec({1, -2, 0.5}), MatrixXd::Identity(3, 3), vec({1, 1, 1}));
  p.Ain.conservativeResize(6, 3);
  p.Ain.bottomRows(3) = -MatrixXd::Identity(3, 3);
  p.bin.conservativeResize(6);
  p.bin.tail(3).setConstant(1.0);
  auto a = solve_lp(p);
  auto b = solve_lp(p);
  ASSERT_TRUE(a.optimal());
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.lambda, b.lambda);
}

TEST(SolveQp, InteriorOptimum) {
  auto s = solve_qp(qp(mat(1, 1, {1}), vec({0}), mat(2, 1, {1, -1}), vec({1, 1})));
  ASSERT_TRUE(s.optimal());
  EXPECT_NEAR(s.x(0), 0.0, 1e-12);
  EXPECT_TRUE(s.active.empty());
}

TEST(SolveQp, OneActiveBound) {
  auto s = solve_qp(qp(mat(1, 1, {1}), vec({-2}), mat(1, 1, {1}), vec({1})));
  ASSERT_TRUE(s.optimal());
  EXPECT_NEAR(s.x(0), 1.0, 1e-12);
  ASSERT_EQ(s.active.size(), 1u);
  EXPECT_EQ(s.active[0], 0);
  EXPECT_NEAR(s.lambda(0), 1.0, 1e-10);
}

TEST(SolveQp, BoxWithLinearTermHandKkt) {
  MatrixXd A(4, 2);
  A << 1, 0, 0, 1, -1, 0, 0, -1;
  auto s = solve_qp(qp(MatrixXd::Identity(2, 2), vec({-3, 0}), A, VectorXd::Ones(4)));
  ASSERT_TRUE(s.optimal());
  EXPECT_NEAR(s.x(0), 1.0, 1e-10);
  EXPECT_NEAR(s.x(1), 0.0, 1e-10);
  // Stationarity by hand: (u - (3,0)) + lambda e1 = 0 at u = (1,0).
  EXPECT_NEAR(s.lambda(0), 2.0, 1e-10);
  EXPECT_NEAR(s.lambda.tail(3).norm(), 0.0, 1e-12);
}

TEST(SolveQp, InfeasibleConstraints) {
  auto s = solve_qp(qp(mat(1, 1, {1}), vec({0}), mat(2, 1, {1, -1}), vec({-1, -1})));
  EXPECT_EQ(s.status, SolveStatus::Infeasible);
}

TEST(SolveQp, IndefiniteHessianRejected) {
  EXPECT_THROW(solve_qp(qp(mat(2, 2, {1, 0, 0, -1}), vec({0, 0}), mat(1, 2, {1, 0}), vec({1}))),
               InputError);
}

TEST(SolveQp, MatchesEnumerationOracleAndIsIdempotent) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 150; ++trial) {
    const int n = 2 + trial % 2;
    const int m = 5;
    MatrixXd L(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) L(i, j) = u(rng);
    MatrixXd P = L * L.transpose() + 0.1 * MatrixXd::Identity(n, n);
    VectorXd q(n);
    for (int i = 0; i < n; ++i) q(i) = 3.0 * u(rng);
    MatrixXd A(m, n);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) A(i, j) = u(rng);
    VectorXd b = VectorXd::Constant(m, 0.3);
    auto s = solve_qp(qp(P, q, A, b));
    ASSERT_TRUE(s.optimal());
    VectorXd xo;
    const double vo = qp_enumeration(P, q, A, b, xo);
    EXPECT_NEAR(s.value, vo, 1e-8);
    EXPECT_LE((s.x - xo).norm(), 1e-6);
    EXPECT_LE((P * s.x + q + A.transpose() * s.lambda).cwiseAbs().maxCoeff(), 1e-8);
    // Equality re-solve on the returned active set.
    const int k = static_cast<int>(s.active.size());
    MatrixXd K = MatrixXd::Zero(n + k, n + k);
    VectorXd r(n + k);
    K.topLeftCorner(n, n) = P;
    r.head(n) = -q;
    for (int j = 0; j < k; ++j) {
      K.block(0, n + j, n, 1) = A.row(s.active[j]).transpose();
      K.block(n + j, 0, 1, n) = A.row(s.active[j]);
      r(n + j) = b(s.active[j]);
    }
    VectorXd e = K.fullPivLu().solve(r);
    EXPECT_LE((e.head(n) - s.x).norm(), 1e-9);
  }
}

TEST(SupportValue, Boxes) {
  MatrixXd H(4, 2);
  H << 1, 0, 0, 1, -1, 0, 0, -1;
  EXPECT_NEAR(support_value(H, VectorXd::Constant(4, 0.1), vec({1, 0})), 0.1, 1e-12);
  EXPECT_NEAR(support_value(H, VectorXd::Constant(4, 10), vec({1, 1})), 20.0, 1e-10);
  // Disturbance box with G = I: support along a G' row.
  MatrixXd G = MatrixXd::Identity(2, 2);
  EXPECT_NEAR(support_value(H, VectorXd::Constant(4, 0.1), G.transpose() * vec({0, 1})), 0.1,
              1e-12);
}

TEST(SupportValue, EmptyAndUnbounded) {
  EXPECT_THROW(support_value(mat(2, 1, {1, -1}), vec({-1, -1}), vec({1})), InfeasibleError);
  EXPECT_THROW(support_value(mat(1, 1, {-1}), vec({0}), vec({1})), UnboundedError);
}

TEST(IndependentRows, DropsDependentRow) {
  MatrixXd M(3, 2);
  M << 1, 0, 2, 0, 0, 1;
  auto rows = independent_rows(M, {0, 1, 2});
  EXPECT_EQ(rows.size(), 2u);
}
