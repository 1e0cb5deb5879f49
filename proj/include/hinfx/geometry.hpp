#pragma once

#include <Eigen/Dense>
#include <random>
#include <vector>

#include "hinfx/config.hpp"

namespace hinfx {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// a'x <= b with |a|_2 = 1.
struct Halfspace {
  VectorXd a;
  double b = 0.0;

  /// Divides (a, b) by |a|_2. Throws InputError on a zero normal.
  static Halfspace normalized(const VectorXd& a, double b);
};

/// Convex polyhedron {x | Hx <= h} in halfspace form. Rows are stored
/// normalized. Emptiness and the Chebyshev ball are computed once at
/// construction; the value is immutable afterwards.
///
/// Rows whose normal vanishes are folded in during construction: 0 <= b is
/// dropped, 0 <= b < 0 marks the set empty.
class Polytope {
 public:
  Polytope() = default;
  Polytope(MatrixXd H, VectorXd h, const Tolerances& tol = {});

  static Polytope box(const VectorXd& lo, const VectorXd& hi, const Tolerances& tol = {});
  static Polytope cube(int dim, double radius, const Tolerances& tol = {});
  /// R^dim: no rows. The Chebyshev radius saturates at kChebyshevCap.
  static Polytope universe(int dim);

  int dim() const { return dim_; }
  int rows() const { return static_cast<int>(h_.size()); }
  const MatrixXd& H() const { return H_; }
  const VectorXd& h() const { return h_; }
  Halfspace row(int i) const { return {H_.row(i).transpose(), h_(i)}; }

  bool is_empty() const { return empty_; }
  /// Nonempty with Chebyshev radius at least `interior`.
  bool is_full_dimensional(double interior = Tolerances{}.interior) const {
    return !empty_ && radius_ >= interior;
  }
  const VectorXd& chebyshev_center() const { return center_; }
  double chebyshev_radius() const { return radius_; }

  /// max_i (H x - h)_i; -inf when there are no rows.
  double max_violation(const VectorXd& x) const;
  bool contains(const VectorXd& x, double tol = Tolerances{}.feas) const;

  static constexpr double kChebyshevCap = 1e6;

 private:
  int dim_ = 0;
  MatrixXd H_;
  VectorXd h_;
  bool empty_ = true;
  VectorXd center_;
  double radius_ = -1.0;
};

/// Rows of p followed by rows of q, then redundancy removal.
Polytope intersect(const Polytope& p, const Polytope& q, const Tolerances& tol = {});
/// p intersected with {x | H x <= h}, without redundancy removal.
Polytope add_rows(const Polytope& p, const MatrixXd& H, const VectorXd& h,
                  const Tolerances& tol = {});

/// {v | v + G w in x for all w in w} by row-wise support tightening.
Polytope pontryagin_difference(const Polytope& x, const MatrixXd& G, const Polytope& w,
                               const Tolerances& tol = {});

/// {z | M z + c in p}.
Polytope affine_preimage(const Polytope& p, const MatrixXd& M, const VectorXd& c,
                         const Tolerances& tol = {});

/// Cartesian product p x q.
Polytope product(const Polytope& p, const Polytope& q, const Tolerances& tol = {});

/// Projection onto the coordinates in `keep` (in that order) by
/// Fourier-Motzkin elimination with redundancy pruning after every step.
Polytope project(const Polytope& p, const std::vector<int>& keep, const Tolerances& tol = {});

/// Irredundant description: duplicate rows merged, then every row that the
/// remaining ones already imply (LP test) dropped.
Polytope remove_redundancy(const Polytope& p, const Tolerances& tol = {});

/// p subset of q, checked by support values of p along q's normals.
bool is_subset(const Polytope& p, const Polytope& q, double tol = 1e-8);

/// Same irredundant normalized rows after canonical sorting, within tol.
bool same_rows(const Polytope& p, const Polytope& q, double tol = Tolerances{}.dedup);
/// Mutual inclusion.
bool same_set(const Polytope& p, const Polytope& q, double tol = 1e-8);

/// max{a'x | x in p}; throws InfeasibleError / UnboundedError.
double support(const Polytope& p, const VectorXd& a, const Tolerances& tol = {});

/// Vertex list by enumerating dim-row combinations. Requires dim <= 4 and a
/// bounded polytope.
std::vector<VectorXd> vertices(const Polytope& p, const Tolerances& tol = {});

/// Ordered vertex loop of a bounded 2-D polytope (counterclockwise).
std::vector<VectorXd> vertex_loop_2d(const Polytope& p, const Tolerances& tol = {});

/// Axis-aligned bounding box (lo, hi) by support evaluation.
std::pair<VectorXd, VectorXd> bounding_box(const Polytope& p, const Tolerances& tol = {});

/// Full-dimensional pieces of p \ q (disjoint interiors).
std::vector<Polytope> set_difference(const Polytope& p, const Polytope& q,
                                     const Tolerances& tol = {});

/// A relatively open piece of the hyperplane {x | a'x = b}, cut by rows
/// H x <= h. Used to track which part of a region facet is still unexplored.
struct FacetPiece {
  VectorXd a;
  double b = 0.0;
  MatrixXd H;
  VectorXd h;
};

/// Chebyshev ball of a facet piece measured inside its hyperplane.
/// Returns radius < 0 when the piece is empty.
std::pair<VectorXd, double> facet_chebyshev(const FacetPiece& f, const Tolerances& tol = {});

/// Facet i of p as a facet piece (all other rows of p as cuts).
FacetPiece facet_of(const Polytope& p, int i);

/// Pieces of f not covered by q, with relative radius at least tol.interior.
std::vector<FacetPiece> facet_difference(const FacetPiece& f, const Polytope& q,
                                         const Tolerances& tol = {});

/// Uniform samples by rejection from the bounding box; falls back to
/// hit-and-run from the Chebyshev center when acceptance is poor. Requires a
/// bounded, full-dimensional polytope.
std::vector<VectorXd> sample_uniform(const Polytope& p, int count, std::mt19937_64& rng,
                                     const Tolerances& tol = {});

/// Uniform samples on the relative interior of facet piece f (hit-and-run
/// inside the hyperplane).
std::vector<VectorXd> sample_facet(const FacetPiece& f, int count, std::mt19937_64& rng,
                                   const Tolerances& tol = {});

/// Polytopic partition of a parent set.
struct Partition {
  Polytope parent;
  std::vector<Polytope> cells;
};

struct PartitionReport {
  int overlapping_pairs = 0;
  double coverage = 0.0;  ///< fraction of parent samples inside some cell
  bool ok() const { return overlapping_pairs == 0 && coverage >= 0.999; }
};

/// Pairwise interior-overlap test and Monte-Carlo coverage of the parent.
PartitionReport check_partition(const Partition& part, std::mt19937_64& rng,
                                const Tolerances& tol = {}, const Budgets& budgets = {});

/// For each point (columns of pts), whether some polytope contains it.
/// Uses the batched slack kernel.
std::vector<bool> covered_by_any(const std::vector<Polytope>& polys, const MatrixXd& pts,
                                 double tol);

}  // namespace hinfx
