#include <gtest/gtest.h>

#include <random>

#include "example_data.hpp"
#include "hinfx/errors.hpp"
#include "hinfx/rhc.hpp"

using namespace hinfx;

namespace {

ProblemSpec example_spec(int N, DpMode mode) {
  ProblemSpec s;
  s.model = {example::A(), example::B(), example::G(), example::Q(), example::R(), example::kGamma};
  s.X = example::X();
  s.U = example::U();
  s.W = example::W();
  const auto pair = synthesize_terminal(s.model, s.X, s.U, s.W);
  s.Pf = pair.P;
  s.Xf = pair.Xf;
  s.N = N;
  s.mode = mode;
  return s;
}

class ClosedLoopTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    spec_ = new ProblemSpec(example_spec(2, DpMode::Constrained));
    stages_ = new std::vector<StageResult>(run_recursion(*spec_));
    loop_ = new ClosedLoop(ClosedLoop::from_stages(*spec_, *stages_));
  }
  static void TearDownTestSuite() {
    delete loop_;
    delete stages_;
    delete spec_;
  }
  static ProblemSpec* spec_;
  static std::vector<StageResult>* stages_;
  static ClosedLoop* loop_;
};

ProblemSpec* ClosedLoopTest::spec_ = nullptr;
std::vector<StageResult>* ClosedLoopTest::stages_ = nullptr;
ClosedLoop* ClosedLoopTest::loop_ = nullptr;

}  // namespace

TEST_F(ClosedLoopTest, OriginIsEquilibrium) {
  const auto t = simulate(*loop_, VectorXd::Zero(2), {}, 20);
  for (const auto& x : t.x) EXPECT_EQ(x.norm(), 0.0);
  const auto c = finite_gain_certificate(spec_->model, t);
  EXPECT_TRUE(c.settled);
  EXPECT_EQ(c.slack, 0.0);
}

TEST_F(ClosedLoopTest, ZeroDisturbanceDescends) {
  std::mt19937_64 rng(21);
  for (const auto& x0 : sample_uniform(loop_->XN, 30, rng)) {
    const auto t = simulate(*loop_, x0, {}, 300);
    EXPECT_LE(worst_descent(spec_->model, t), 1e-7);
    EXPECT_LE(t.x.back().norm(), 1e-6);
    EXPECT_LE(t.dynamics_residual(spec_->model), 1e-12);
    // Zero-disturbance bound: the value pays for all future output energy.
    const auto c = finite_gain_certificate(spec_->model, t);
    EXPECT_TRUE(c.settled);
    EXPECT_GE(c.slack, -1e-7);
  }
}

TEST_F(ClosedLoopTest, WorstVertexRolloutsStayInside) {
  std::mt19937_64 rng(22);
  DisturbanceSource worst{DisturbanceKind::Worst, {}, 1};
  for (const auto& x0 : sample_uniform(loop_->XN, 50, rng)) {
    Trajectory t;
    ASSERT_NO_THROW(t = simulate(*loop_, x0, worst, 30));
    for (const auto& x : t.x) EXPECT_TRUE(loop_->XN.contains(x));
    for (const auto& w : t.w) EXPECT_TRUE(spec_->W.contains(w));
  }
}

TEST_F(ClosedLoopTest, StartOutsideRejected) {
  EXPECT_THROW(simulate(*loop_, (VectorXd(2) << 9.5, 9.5).finished(), {}, 5), DomainError);
}

TEST_F(ClosedLoopTest, SequenceThenZero) {
  DisturbanceSource src;
  src.kind = DisturbanceKind::Sequence;
  src.sequence = {(VectorXd(2) << 0.1, -0.05).finished(), (VectorXd(2) << 0.0, 0.1).finished()};
  const auto t = simulate(*loop_, VectorXd::Zero(2), src, 5);
  EXPECT_EQ(t.w[0], src.sequence[0]);
  EXPECT_EQ(t.w[1], src.sequence[1]);
  for (int i = 2; i < 5; ++i) EXPECT_EQ(t.w[i].norm(), 0.0);
}

TEST_F(ClosedLoopTest, BurstCertificate) {
  std::mt19937_64 rng(23);
  DisturbanceSource src;
  src.kind = DisturbanceKind::Sequence;
  std::uniform_real_distribution<double> ud(-0.1, 0.1);
  for (const auto& x0 : sample_uniform(loop_->XN, 20, rng)) {
    src.sequence.clear();
    for (int i = 0; i < 8; ++i) src.sequence.push_back((VectorXd(2) << ud(rng), ud(rng)).finished());
    const auto t = simulate(*loop_, x0, src, 300);
    const auto c = finite_gain_certificate(spec_->model, t);
    ASSERT_TRUE(c.settled);
    EXPECT_GE(c.slack, -1e-7);
  }
}

TEST_F(ClosedLoopTest, OutputEnergyMatchesStageCost) {
  std::mt19937_64 rng(24);
  const VectorXd x = (VectorXd(2) << 1.2, -0.7).finished();
  const VectorXd u = (VectorXd(1) << 0.3).finished();
  const VectorXd y = output(spec_->model, x, u);
  EXPECT_NEAR(0.5 * y.squaredNorm(), spec_->model.stage_cost(x, u, VectorXd::Zero(2)), 1e-12);
}

TEST_F(ClosedLoopTest, CsvHasHeaderAndRows) {
  const auto t = simulate(*loop_, (VectorXd(2) << 1, 0).finished(), {}, 3);
  const std::string csv = trajectory_csv(t);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "i,x1,x2,u1,w1,w2,y1,y2,y3,l,V");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
}

TEST(Attraction, RestrictedLoopReachesTerminalSet) {
  const auto spec = example_spec(3, DpMode::Restricted);
  const auto stages = run_recursion(spec);
  std::mt19937_64 rng(31);
  const auto rep = attraction_check(spec, stages, rng, 100, 10);
  EXPECT_TRUE(rep.ok()) << rep.failures;
  EXPECT_LE(rep.max_steps_to_enter, 3);

  // One step from X*_1 lands in Xf for every disturbance vertex.
  const ClosedLoop loop = ClosedLoop::from_stages(spec, stages);
  const auto wv = vertices(spec.W);
  int outside = 0;
  for (const auto& piece : stages[1].XjStar) {
    for (const auto& x : sample_uniform(piece, 20, rng)) {
      if (spec.Xf.contains(x)) continue;
      ++outside;
      const VectorXd u = evaluate(loop.kappaN, x);
      for (const auto& w : wv) EXPECT_TRUE(spec.Xf.contains(spec.model.step(x, u, w), 1e-7));
    }
  }
  EXPECT_GT(outside, 0);

  // Points of Xf stay there.
  for (const auto& x : sample_uniform(spec.Xf, 20, rng)) {
    const VectorXd u = evaluate(loop.kappaN, x);
    for (const auto& w : wv) EXPECT_TRUE(spec.Xf.contains(spec.model.step(x, u, w), 1e-7));
  }
}
