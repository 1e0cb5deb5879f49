#include "hinfx/pwq.hpp"

#include <cmath>
#include <limits>

#include "hinfx/errors.hpp"

namespace hinfx {

QuadraticForm QuadraticForm::zero(int dim) {
  return {MatrixXd::Zero(dim, dim), VectorXd::Zero(dim), 0.0};
}

QuadraticForm QuadraticForm::compose(const MatrixXd& M, const VectorXd& c) const {
  if (M.rows() != dim() || c.size() != dim()) throw InputError("compose: map dimension mismatch");
  QuadraticForm out;
  out.Q = M.transpose() * Q * M;
  out.q = M.transpose() * (Q * c + q);
  out.s = 0.5 * c.dot(Q * c) + q.dot(c) + s;
  out.symmetrize();
  return out;
}

QuadraticForm QuadraticForm::operator+(const QuadraticForm& o) const {
  if (o.dim() != dim()) throw InputError("quadratic sum: dimension mismatch");
  return {Q + o.Q, q + o.q, s + o.s};
}

QuadraticForm QuadraticForm::operator-() const { return {-Q, -q, -s}; }

bool canonical_less(const Polytope& a, const Polytope& b) {
  const VectorXd& ca = a.chebyshev_center();
  const VectorXd& cb = b.chebyshev_center();
  for (int i = 0; i < std::min(ca.size(), cb.size()); ++i) {
    const double ra = std::round(ca(i) * 1e6);
    const double rb = std::round(cb(i) * 1e6);
    if (ra != rb) return ra < rb;
  }
  return a.chebyshev_radius() > b.chebyshev_radius();
}

namespace {

template <class Piece>
const Piece& piece_at(const Piecewise<Piece>& f, const VectorXd& x, double tol) {
  if (x.size() != f.dim()) throw InputError("evaluation point has the wrong dimension");
  const int i = f.locate(x, tol);
  if (i < 0) throw DomainError("point lies outside the partition");
  return f.pieces[i];
}

}  // namespace

double evaluate(const PwqFunction& f, const VectorXd& x, double tol) {
  return piece_at(f, x, tol)(x);
}

VectorXd gradient(const PwqFunction& f, const VectorXd& x, double tol) {
  return piece_at(f, x, tol).gradient(x);
}

VectorXd evaluate(const PiecewiseAffineLaw& f, const VectorXd& x, double tol) {
  return piece_at(f, x, tol)(x);
}

std::vector<Adjacency> adjacent_cells(const std::vector<Polytope>& cells, const Tolerances& tol) {
  std::vector<Adjacency> out;
  for (int i = 0; i < static_cast<int>(cells.size()); ++i) {
    for (int r = 0; r < cells[i].rows(); ++r) {
      const FacetPiece facet = facet_of(cells[i], r);
      for (int j = i + 1; j < static_cast<int>(cells.size()); ++j) {
        // Cell j must reach across the facet hyperplane.
        try {
          if (support(cells[j], facet.a, tol) <= facet.b + tol.interior) continue;
        } catch (const Error&) {
          continue;
        }
        FacetPiece shared = facet;
        const auto base = shared.H.rows();
        shared.H.conservativeResize(base + cells[j].rows(), Eigen::NoChange);
        shared.h.conservativeResize(base + cells[j].rows());
        shared.H.bottomRows(cells[j].rows()) = cells[j].H();
        shared.h.tail(cells[j].rows()) = cells[j].h();
        if (facet_chebyshev(shared, tol).second >= tol.interior)
          out.push_back({i, j, std::move(shared)});
      }
    }
  }
  return out;
}

ConvexityReport check_convexity(const PwqFunction& f, std::mt19937_64& rng, const Tolerances& tol,
                                const Budgets& budgets) {
  ConvexityReport rep;
  rep.min_eigenvalue = std::numeric_limits<double>::infinity();
  for (const auto& p : f.pieces) {
    const MatrixXd S = 0.5 * (p.Q + p.Q.transpose());
    const double e = S.size() == 0 ? 0.0 : Eigen::SelfAdjointEigenSolver<MatrixXd>(S).eigenvalues()(0);
    rep.min_eigenvalue = std::min(rep.min_eigenvalue, e);
    if (e < -tol.pd) ++rep.nonconvex_pieces;
  }
  if (f.size() == 0 || !f.domain.is_full_dimensional(tol.interior)) return rep;
  const int pairs = budgets.convexity_pairs;
  auto pts = sample_uniform(f.domain, 2 * pairs, rng, tol);
  for (int k = 0; k < pairs; ++k) {
    const VectorXd& a = pts[2 * k];
    const VectorXd& b = pts[2 * k + 1];
    const VectorXd mid = 0.5 * (a + b);
    const int ia = f.locate(a), ib = f.locate(b), im = f.locate(mid);
    if (ia < 0 || ib < 0 || im < 0) continue;
    ++rep.pairs_tested;
    const double fa = f.pieces[ia](a), fb = f.pieces[ib](b), fm = f.pieces[im](mid);
    if (fm > 0.5 * fa + 0.5 * fb + 1e-8) ++rep.midpoint_violations;
  }
  return rep;
}

RegularityReport check_regularity(const PwqFunction& f, std::mt19937_64& rng,
                                  const Tolerances& tol, const Budgets& budgets) {
  RegularityReport rep;
  for (const auto& adj : adjacent_cells(f.cells, tol)) {
    ++rep.adjacent_pairs;
    const auto& p1 = f.pieces[adj.first];
    const auto& p2 = f.pieces[adj.second];
    for (const auto& x : sample_facet(adj.shared, budgets.facet_samples, rng, tol)) {
      ++rep.samples;
      const double v1 = p1(x), v2 = p2(x);
      const double gap = std::abs(v1 - v2) / (1.0 + std::abs(v1));
      rep.max_value_gap = std::max(rep.max_value_gap, gap);
      if (gap > tol.cont) ++rep.continuity_violations;
      rep.max_gradient_jump = std::max(rep.max_gradient_jump, (p1.gradient(x) - p2.gradient(x)).norm());
    }
  }
  return rep;
}

double law_continuity_gap(const PiecewiseAffineLaw& f, std::mt19937_64& rng, const Tolerances& tol,
                          const Budgets& budgets) {
  double gap = 0.0;
  for (const auto& adj : adjacent_cells(f.cells, tol)) {
    for (const auto& x : sample_facet(adj.shared, budgets.facet_samples, rng, tol)) {
      gap = std::max(gap, (f.pieces[adj.first](x) - f.pieces[adj.second](x)).cwiseAbs().maxCoeff());
    }
  }
  return gap;
}

double check_concavity_margin(const PwqFunction& f, const MatrixXd& G, double gamma) {
  const auto p = G.cols();
  double margin = std::numeric_limits<double>::infinity();
  for (const auto& piece : f.pieces) {
    if (piece.Q.rows() != G.rows()) throw InputError("concavity margin: G does not match the pieces");
    MatrixXd M = gamma * gamma * MatrixXd::Identity(p, p) - G.transpose() * piece.Q * G;
    M = 0.5 * (M + M.transpose()).eval();
    margin = std::min(margin, Eigen::SelfAdjointEigenSolver<MatrixXd>(M).eigenvalues()(0));
  }
  return margin;
}

}  // namespace hinfx
