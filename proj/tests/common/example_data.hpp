#pragma once

// Data of the second-order worked example shared by unit and acceptance tests.

#include <Eigen/Dense>

#include "hinfx/geometry.hpp"

namespace example {

inline Eigen::MatrixXd A() { return (Eigen::MatrixXd(2, 2) << 1, 1, 0, 1).finished(); }
inline Eigen::MatrixXd B() { return (Eigen::MatrixXd(2, 1) << 0.5, 1).finished(); }
inline Eigen::MatrixXd G() { return Eigen::MatrixXd::Identity(2, 2); }
inline Eigen::MatrixXd Q() { return 10.0 * Eigen::MatrixXd::Identity(2, 2); }
inline Eigen::MatrixXd R() { return Eigen::MatrixXd::Identity(1, 1); }
inline constexpr double kGamma = 100.0;

inline hinfx::Polytope X() { return hinfx::Polytope::cube(2, 10.0); }
inline hinfx::Polytope U() { return hinfx::Polytope::cube(1, 1.0); }
inline hinfx::Polytope W() { return hinfx::Polytope::cube(2, 0.1); }

/// Reference terminal weight, rounded to 4 decimals.
inline Eigen::MatrixXd Pf_ref() {
  return (Eigen::MatrixXd(2, 2) << 20.6143, 5.9244, 5.9244, 14.2329).finished();
}

/// Reference terminal set, rounded to 4 decimals. The set is symmetric about
/// the origin, so the first row mirrors the second.
inline hinfx::Polytope Xf_ref() {
  Eigen::MatrixXd H(4, 2);
  H << -0.9489, -0.3155, 0.9489, 0.3155, 0.4369, 0.8995, -0.4369, -0.8995;
  Eigen::VectorXd h(4);
  h << 2.1526, 2.1526, 0.7079, 0.7079;
  return hinfx::Polytope(H, h);
}

/// Reference rows with a transposed digit (0.9849) in the first normal.
inline hinfx::Polytope Xf_literal() {
  Eigen::MatrixXd H(4, 2);
  H << -0.9849, -0.3155, 0.9489, 0.3155, 0.4369, 0.8995, -0.4369, -0.8995;
  Eigen::VectorXd h(4);
  h << 2.1526, 2.1526, 0.7079, 0.7079;
  return hinfx::Polytope(H, h);
}

}  // namespace example
