#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <random>
#include <vector>

#include "hinfx/config.hpp"
#include "hinfx/geometry.hpp"

namespace hinfx {

/// 1/2 x'Qx + q'x + s.
struct QuadraticForm {
  MatrixXd Q;
  VectorXd q;
  double s = 0.0;

  static QuadraticForm zero(int dim);
  int dim() const { return static_cast<int>(q.size()); }
  double operator()(const VectorXd& x) const { return 0.5 * x.dot(Q * x) + q.dot(x) + s; }
  VectorXd gradient(const VectorXd& x) const { return Q * x + q; }

  /// y -> this(M y + c).
  QuadraticForm compose(const MatrixXd& M, const VectorXd& c) const;
  QuadraticForm operator+(const QuadraticForm& o) const;
  QuadraticForm operator-() const;
  /// Symmetrizes Q in place.
  void symmetrize() { Q = 0.5 * (Q + Q.transpose()).eval(); }
};

/// x -> Kx + k.
struct AffineLaw {
  MatrixXd K;
  VectorXd k;

  VectorXd operator()(const VectorXd& x) const { return K * x + k; }
  int in_dim() const { return static_cast<int>(K.cols()); }
  int out_dim() const { return static_cast<int>(k.size()); }
};

/// A function defined piece by piece on a polytopic partition of `domain`.
/// Cells are kept in canonical order (Chebyshev centers rounded to 1e-6,
/// compared lexicographically) so that point location is reproducible.
template <class Piece>
struct Piecewise {
  Polytope domain;
  std::vector<Polytope> cells;
  std::vector<Piece> pieces;

  int size() const { return static_cast<int>(cells.size()); }
  int dim() const { return domain.dim(); }

  /// First cell (canonical order) whose rows hold at x within tol; -1 if none.
  int locate(const VectorXd& x, double tol = Tolerances{}.feas) const {
    for (int i = 0; i < size(); ++i)
      if (cells[i].contains(x, tol)) return i;
    return -1;
  }

  Partition partition() const { return {domain, cells}; }

  void canonicalize();
};

using PwqFunction = Piecewise<QuadraticForm>;
using PiecewiseAffineLaw = Piecewise<AffineLaw>;

/// Canonical ordering key shared by every piecewise container.
bool canonical_less(const Polytope& a, const Polytope& b);

template <class Piece>
void Piecewise<Piece>::canonicalize() {
  std::vector<int> order(cells.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return canonical_less(cells[a], cells[b]); });
  std::vector<Polytope> c;
  std::vector<Piece> p;
  for (int i : order) {
    c.push_back(cells[i]);
    p.push_back(pieces[i]);
  }
  cells = std::move(c);
  pieces = std::move(p);
}

/// Throws DomainError when x lies in no cell.
double evaluate(const PwqFunction& f, const VectorXd& x, double tol = Tolerances{}.feas);
VectorXd gradient(const PwqFunction& f, const VectorXd& x, double tol = Tolerances{}.feas);
VectorXd evaluate(const PiecewiseAffineLaw& f, const VectorXd& x, double tol = Tolerances{}.feas);

/// Pairs of cells sharing a (d-1)-dimensional facet piece.
struct Adjacency {
  int first = 0;
  int second = 0;
  FacetPiece shared;
};
std::vector<Adjacency> adjacent_cells(const std::vector<Polytope>& cells,
                                      const Tolerances& tol = {});

struct ConvexityReport {
  double min_eigenvalue = 0.0;   ///< smallest eigenvalue over all pieces
  int nonconvex_pieces = 0;      ///< pieces with min eigenvalue below -pd
  int midpoint_violations = 0;   ///< f(mid) > (f(a)+f(b))/2 + 1e-8
  int pairs_tested = 0;
  bool convex() const { return nonconvex_pieces == 0 && midpoint_violations == 0; }
  bool strictly_convex(double pd = Tolerances{}.pd) const {
    return convex() && min_eigenvalue > pd;
  }
};
ConvexityReport check_convexity(const PwqFunction& f, std::mt19937_64& rng,
                                const Tolerances& tol = {}, const Budgets& budgets = {});

struct RegularityReport {
  int adjacent_pairs = 0;
  int samples = 0;
  double max_value_gap = 0.0;     ///< max |f_i - f_j| / (1 + |f|)
  double max_gradient_jump = 0.0; ///< max |grad f_i - grad f_j|
  int continuity_violations = 0;  ///< samples with value gap above tol.cont
  bool continuous() const { return continuity_violations == 0; }
  bool c1(double tol) const { return max_gradient_jump <= tol; }
};
/// Value and gradient agreement at sampled points of every shared facet.
RegularityReport check_regularity(const PwqFunction& f, std::mt19937_64& rng,
                                  const Tolerances& tol = {}, const Budgets& budgets = {});

/// Max |law_i - law_j| at sampled shared-facet points.
double law_continuity_gap(const PiecewiseAffineLaw& f, std::mt19937_64& rng,
                          const Tolerances& tol = {}, const Budgets& budgets = {});

/// min over pieces of lambda_min(gamma^2 I - G'Q_i G).
double check_concavity_margin(const PwqFunction& f, const MatrixXd& G, double gamma);

}  // namespace hinfx
