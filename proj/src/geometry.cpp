#include "hinfx/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hinfx/errors.hpp"
#include "hinfx/kernels.hpp"
#include "hinfx/optbase.hpp"

namespace hinfx {

namespace {

constexpr double kZeroNormal = 1e-10;
constexpr double kFmZero = 1e-12;

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Chebyshev LP over (c, r): max r s.t. H c + r * w <= h, Aeq c = beq, r <= cap.
std::pair<VectorXd, double> chebyshev_lp(const MatrixXd& H, const VectorXd& h,
                                         const VectorXd& weights, const MatrixXd& Aeq,
                                         const VectorXd& beq, int dim, const Tolerances& tol) {
  const int m = static_cast<int>(h.size());
  LpProblem lp;
  lp.cost = VectorXd::Zero(dim + 1);
  lp.cost(dim) = -1.0;
  lp.Ain = MatrixXd::Zero(m + 1, dim + 1);
  lp.bin = VectorXd::Zero(m + 1);
  if (m > 0) {
    lp.Ain.topLeftCorner(m, dim) = H;
    lp.Ain.block(0, dim, m, 1) = weights;
    lp.bin.head(m) = h;
  }
  lp.Ain(m, dim) = 1.0;
  lp.bin(m) = Polytope::kChebyshevCap;
  if (Aeq.rows() > 0) {
    lp.Aeq = MatrixXd::Zero(Aeq.rows(), dim + 1);
    lp.Aeq.leftCols(dim) = Aeq;
    lp.beq = beq;
  } else {
    lp.Aeq = MatrixXd(0, dim + 1);
    lp.beq = VectorXd(0);
  }
  Solution sol = solve_lp(lp, tol);
  if (!sol.optimal()) return {VectorXd::Zero(dim), -1.0};
  return {sol.x.head(dim), sol.x(dim)};
}

bool rows_match(const VectorXd& a1, double b1, const VectorXd& a2, double b2, double tol) {
  return (a1 - a2).cwiseAbs().maxCoeff() <= tol && std::abs(b1 - b2) <= tol;
}

Polytope make_empty(int dim) {
  MatrixXd H = MatrixXd::Zero(1, dim);
  VectorXd h = VectorXd::Constant(1, -1.0);
  return Polytope(H, h);
}

}  // namespace

Halfspace Halfspace::normalized(const VectorXd& a, double b) {
  const double n = a.norm();
  if (!(n > kZeroNormal)) throw InputError("halfspace with zero normal");
  return {a / n, b / n};
}

Polytope::Polytope(MatrixXd H, VectorXd h, const Tolerances& tol) {
  if (H.rows() != h.size()) throw InputError("polytope: row count of H and h differ");
  dim_ = static_cast<int>(H.cols());
  bool infeasible_row = false;
  std::vector<int> keep;
  for (int i = 0; i < H.rows(); ++i) {
    if (!std::isfinite(h(i)) || !H.row(i).allFinite()) {
      if (h(i) == std::numeric_limits<double>::infinity() && H.row(i).allFinite()) continue;
      throw InputError("polytope: non-finite row");
    }
    const double n = H.row(i).norm();
    if (n <= kZeroNormal) {
      if (h(i) < -tol.feas) infeasible_row = true;
      continue;
    }
    keep.push_back(i);
  }
  H_.resize(static_cast<Eigen::Index>(keep.size()), dim_);
  h_.resize(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t r = 0; r < keep.size(); ++r) {
    const double n = H.row(keep[r]).norm();
    H_.row(r) = H.row(keep[r]) / n;
    h_(r) = h(keep[r]) / n;
  }
  if (infeasible_row) {
    empty_ = true;
    center_ = VectorXd::Zero(dim_);
    radius_ = -1.0;
    return;
  }
  auto [c, r] = chebyshev_lp(H_, h_, VectorXd::Ones(rows()), MatrixXd(0, dim_), VectorXd(0), dim_,
                             tol);
  center_ = c;
  radius_ = r;
  empty_ = r < -tol.feas;
}

Polytope Polytope::box(const VectorXd& lo, const VectorXd& hi, const Tolerances& tol) {
  const int n = static_cast<int>(lo.size());
  if (hi.size() != n) throw InputError("box: bound sizes differ");
  MatrixXd H(2 * n, n);
  H << MatrixXd::Identity(n, n), -MatrixXd::Identity(n, n);
  VectorXd h(2 * n);
  h << hi, -lo;
  return Polytope(H, h, tol);
}

Polytope Polytope::cube(int dim, double radius, const Tolerances& tol) {
  return box(VectorXd::Constant(dim, -radius), VectorXd::Constant(dim, radius), tol);
}

Polytope Polytope::universe(int dim) { return Polytope(MatrixXd(0, dim), VectorXd(0)); }

double Polytope::max_violation(const VectorXd& x) const {
  if (rows() == 0) return -std::numeric_limits<double>::infinity();
  return (H_ * x - h_).maxCoeff();
}

bool Polytope::contains(const VectorXd& x, double tol) const {
  if (empty_) return false;
  if (x.size() != dim_) throw InputError("contains: point dimension mismatch");
  return max_violation(x) <= tol;
}

Polytope add_rows(const Polytope& p, const MatrixXd& H, const VectorXd& h, const Tolerances& tol) {
  if (H.rows() > 0 && H.cols() != p.dim()) throw InputError("add_rows: dimension mismatch");
  MatrixXd Hn(p.rows() + H.rows(), p.dim());
  VectorXd hn(p.rows() + H.rows());
  Hn << p.H(), H;
  hn << p.h(), h;
  if (p.is_empty()) return make_empty(p.dim());
  return Polytope(Hn, hn, tol);
}

Polytope intersect(const Polytope& p, const Polytope& q, const Tolerances& tol) {
  if (p.dim() != q.dim()) throw InputError("intersect: dimension mismatch");
  if (p.is_empty() || q.is_empty()) return make_empty(p.dim());
  return remove_redundancy(add_rows(p, q.H(), q.h(), tol), tol);
}

Polytope pontryagin_difference(const Polytope& x, const MatrixXd& G, const Polytope& w,
                               const Tolerances& tol) {
  if (G.rows() != x.dim() || G.cols() != w.dim())
    throw InputError("pontryagin_difference: G has inconsistent dimensions");
  if (w.is_empty()) throw InputError("pontryagin_difference: disturbance set is empty");
  VectorXd h = x.h();
  for (int i = 0; i < x.rows(); ++i) {
    const VectorXd dir = G.transpose() * x.H().row(i).transpose();
    if (dir.norm() == 0.0) continue;
    h(i) -= support(w, dir, tol);
  }
  if (x.is_empty()) return make_empty(x.dim());
  return Polytope(x.H(), h, tol);
}

Polytope affine_preimage(const Polytope& p, const MatrixXd& M, const VectorXd& c,
                         const Tolerances& tol) {
  if (M.rows() != p.dim() || c.size() != p.dim())
    throw InputError("affine_preimage: map has inconsistent dimensions");
  if (p.is_empty()) return make_empty(static_cast<int>(M.cols()));
  return Polytope(p.H() * M, p.h() - p.H() * c, tol);
}

Polytope product(const Polytope& p, const Polytope& q, const Tolerances& tol) {
  const int n = p.dim();
  const int m = q.dim();
  if (p.is_empty() || q.is_empty()) return make_empty(n + m);
  MatrixXd H = MatrixXd::Zero(p.rows() + q.rows(), n + m);
  H.topLeftCorner(p.rows(), n) = p.H();
  H.bottomRightCorner(q.rows(), m) = q.H();
  VectorXd h(p.rows() + q.rows());
  h << p.h(), q.h();
  return Polytope(H, h, tol);
}

Polytope remove_redundancy(const Polytope& p, const Tolerances& tol) {
  if (p.is_empty()) return p;
  const int m = p.rows();
  const int n = p.dim();

  // Merge duplicate normals, keeping the tightest offset.
  std::vector<int> order;
  std::vector<double> offset;
  for (int i = 0; i < m; ++i) {
    bool merged = false;
    for (std::size_t k = 0; k < order.size(); ++k) {
      if ((p.H().row(order[k]) - p.H().row(i)).cwiseAbs().maxCoeff() <= tol.redundancy) {
        offset[k] = std::min(offset[k], p.h()(i));
        merged = true;
        break;
      }
    }
    if (!merged) {
      order.push_back(i);
      offset.push_back(p.h()(i));
    }
  }

  // Rays from the Chebyshev center along each normal: the row hit first, by a
  // clear margin, is a facet and needs no LP.
  std::vector<bool> facet(order.size(), false);
  if (p.chebyshev_radius() > tol.interior) {
    const VectorXd& c = p.chebyshev_center();
    for (std::size_t i = 0; i < order.size(); ++i) {
      const VectorXd d = p.H().row(order[i]).transpose();
      int best = -1;
      double t1 = std::numeric_limits<double>::infinity();
      double t2 = t1;
      for (std::size_t j = 0; j < order.size(); ++j) {
        const double ad = p.H().row(order[j]).dot(d);
        if (ad <= 1e-12) continue;
        const double t = (offset[j] - p.H().row(order[j]).dot(c)) / ad;
        if (t < t1) {
          t2 = t1;
          t1 = t;
          best = static_cast<int>(j);
        } else if (t < t2) {
          t2 = t;
        }
      }
      if (best >= 0 && t2 - t1 > 1e-6 * (1.0 + std::abs(t1))) facet[best] = true;
    }
  }

  std::vector<bool> alive(order.size(), true);
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (facet[i]) continue;
    int others = 0;
    for (std::size_t j = 0; j < order.size(); ++j)
      if (j != i && alive[j]) ++others;
    LpProblem lp;
    lp.cost = -p.H().row(order[i]).transpose();
    lp.Ain.resize(others + 1, n);
    lp.bin.resize(others + 1);
    int r = 0;
    for (std::size_t j = 0; j < order.size(); ++j) {
      if (j == i || !alive[j]) continue;
      lp.Ain.row(r) = p.H().row(order[j]);
      lp.bin(r) = offset[j];
      ++r;
    }
    // Cap keeps the LP bounded; reaching the cap means "not redundant".
    lp.Ain.row(r) = p.H().row(order[i]);
    lp.bin(r) = offset[i] + 1.0;
    lp.Aeq = MatrixXd(0, n);
    lp.beq = VectorXd(0);
    Solution sol = solve_lp(lp, tol);
    if (sol.optimal() && -sol.value <= offset[i] + tol.redundancy) alive[i] = false;
  }

  std::vector<int> kept;
  for (std::size_t i = 0; i < order.size(); ++i)
    if (alive[i]) kept.push_back(static_cast<int>(i));
  MatrixXd H(static_cast<Eigen::Index>(kept.size()), n);
  VectorXd h(static_cast<Eigen::Index>(kept.size()));
  for (std::size_t r = 0; r < kept.size(); ++r) {
    H.row(r) = p.H().row(order[kept[r]]);
    h(r) = offset[kept[r]];
  }
  return Polytope(H, h, tol);
}

Polytope project(const Polytope& p, const std::vector<int>& keep, const Tolerances& tol) {
  const int n = p.dim();
  std::vector<bool> kept(n, false);
  for (int k : keep) {
    if (k < 0 || k >= n || kept[k]) throw InputError("project: invalid coordinate list");
    kept[k] = true;
  }
  if (p.is_empty()) return make_empty(static_cast<int>(keep.size()));

  MatrixXd H = p.H();
  VectorXd h = p.h();
  std::vector<int> cols(n);
  std::iota(cols.begin(), cols.end(), 0);

  for (int var = n - 1; var >= 0; --var) {
    if (kept[var]) continue;
    const int k = static_cast<int>(std::find(cols.begin(), cols.end(), var) - cols.begin());
    std::vector<int> pos, neg, zero;
    for (int i = 0; i < H.rows(); ++i) {
      if (H(i, k) > kFmZero)
        pos.push_back(i);
      else if (H(i, k) < -kFmZero)
        neg.push_back(i);
      else
        zero.push_back(i);
    }
    const int width = static_cast<int>(cols.size()) - 1;
    const auto count = static_cast<Eigen::Index>(zero.size() + pos.size() * neg.size());
    MatrixXd Hn(count, width);
    VectorXd hn(count);
    auto drop_col = [&](const Eigen::RowVectorXd& row) {
      Eigen::RowVectorXd out(width);
      out << row.head(k), row.tail(width - k);
      return out;
    };
    Eigen::Index r = 0;
    for (int i : zero) {
      Hn.row(r) = drop_col(H.row(i));
      hn(r) = h(i);
      ++r;
    }
    for (int i : pos) {
      for (int j : neg) {
        const double ci = -H(j, k);
        const double cj = H(i, k);
        Hn.row(r) = drop_col(ci * H.row(i) + cj * H.row(j));
        hn(r) = ci * h(i) + cj * h(j);
        ++r;
      }
    }
    cols.erase(cols.begin() + k);
    Polytope step = remove_redundancy(Polytope(Hn, hn, tol), tol);
    if (step.is_empty()) return make_empty(static_cast<int>(keep.size()));
    H = step.H();
    h = step.h();
  }

  // Reorder remaining columns to follow `keep`.
  MatrixXd Hk(H.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) {
    const auto pos = std::find(cols.begin(), cols.end(), keep[c]) - cols.begin();
    Hk.col(static_cast<Eigen::Index>(c)) = H.col(pos);
  }
  return Polytope(Hk, h, tol);
}

double support(const Polytope& p, const VectorXd& a, const Tolerances& tol) {
  if (a.size() != p.dim()) throw InputError("support: direction dimension mismatch");
  if (p.is_empty()) throw InfeasibleError("support of an empty polytope");
  return support_value(p.H(), p.h(), a, tol);
}

bool is_subset(const Polytope& p, const Polytope& q, double tol) {
  if (p.dim() != q.dim()) throw InputError("is_subset: dimension mismatch");
  if (p.is_empty()) return true;
  if (q.is_empty()) return false;
  for (int i = 0; i < q.rows(); ++i) {
    try {
      if (support(p, q.H().row(i).transpose()) > q.h()(i) + tol) return false;
    } catch (const UnboundedError&) {
      return false;
    }
  }
  return true;
}

bool same_rows(const Polytope& p, const Polytope& q, double tol) {
  if (p.dim() != q.dim()) return false;
  if (p.is_empty() || q.is_empty()) return p.is_empty() && q.is_empty();
  if (p.rows() != q.rows()) return false;
  std::vector<bool> used(q.rows(), false);
  for (int i = 0; i < p.rows(); ++i) {
    bool found = false;
    for (int j = 0; j < q.rows(); ++j) {
      if (used[j]) continue;
      if (rows_match(p.H().row(i).transpose(), p.h()(i), q.H().row(j).transpose(), q.h()(j), tol)) {
        used[j] = true;
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

bool same_set(const Polytope& p, const Polytope& q, double tol) {
  return is_subset(p, q, tol) && is_subset(q, p, tol);
}

std::vector<VectorXd> vertices(const Polytope& p, const Tolerances& tol) {
  const int d = p.dim();
  if (d > 4) throw UnsupportedError("vertex enumeration is limited to dimension 4");
  std::vector<VectorXd> out;
  if (p.is_empty() || d == 0) return out;
  const int m = p.rows();
  if (m < d) throw UnboundedError("vertices: polytope is unbounded");
  std::vector<int> idx(d);
  std::iota(idx.begin(), idx.end(), 0);
  const double accept = 1e-9 * (1.0 + p.h().cwiseAbs().maxCoeff());
  while (true) {
    MatrixXd M(d, d);
    VectorXd rhs(d);
    for (int r = 0; r < d; ++r) {
      M.row(r) = p.H().row(idx[r]);
      rhs(r) = p.h()(idx[r]);
    }
    Eigen::FullPivLU<MatrixXd> lu(M);
    lu.setThreshold(1e-10);
    if (lu.rank() == d) {
      VectorXd v = lu.solve(rhs);
      if (p.max_violation(v) <= accept) {
        bool dup = false;
        for (const auto& u : out)
          if ((u - v).cwiseAbs().maxCoeff() <= tol.dedup * (1.0 + v.cwiseAbs().maxCoeff())) {
            dup = true;
            break;
          }
        if (!dup) out.push_back(v);
      }
    }
    int k = d - 1;
    while (k >= 0 && idx[k] == m - d + k) --k;
    if (k < 0) break;
    ++idx[k];
    for (int j = k + 1; j < d; ++j) idx[j] = idx[j - 1] + 1;
  }
  return out;
}

std::vector<VectorXd> vertex_loop_2d(const Polytope& p, const Tolerances& tol) {
  if (p.dim() != 2) throw InputError("vertex_loop_2d: polytope is not 2-D");
  auto v = vertices(p, tol);
  if (v.empty()) return v;
  VectorXd c = VectorXd::Zero(2);
  for (const auto& x : v) c += x;
  c /= static_cast<double>(v.size());
  std::sort(v.begin(), v.end(), [&](const VectorXd& a, const VectorXd& b) {
    return std::atan2(a(1) - c(1), a(0) - c(0)) < std::atan2(b(1) - c(1), b(0) - c(0));
  });
  return v;
}

std::pair<VectorXd, VectorXd> bounding_box(const Polytope& p, const Tolerances& tol) {
  const int n = p.dim();
  VectorXd lo(n), hi(n);
  for (int i = 0; i < n; ++i) {
    VectorXd e = VectorXd::Zero(n);
    e(i) = 1.0;
    hi(i) = support(p, e, tol);
    lo(i) = -support(p, -e, tol);
  }
  return {lo, hi};
}

std::vector<Polytope> set_difference(const Polytope& p, const Polytope& q, const Tolerances& tol) {
  if (p.dim() != q.dim()) throw InputError("set_difference: dimension mismatch");
  if (p.is_empty()) return {};
  Polytope overlap = add_rows(p, q.H(), q.h(), tol);
  if (!overlap.is_full_dimensional(tol.interior)) return {p};
  std::vector<Polytope> out;
  MatrixXd acc_H(0, p.dim());
  VectorXd acc_h(0);
  for (int i = 0; i < q.rows(); ++i) {
    const VectorXd a = q.H().row(i).transpose();
    const double b = q.h()(i);
    if (support(p, a, tol) <= b + tol.redundancy) continue;
    MatrixXd H(acc_H.rows() + 1, p.dim());
    VectorXd h(acc_h.size() + 1);
    H << acc_H, -a.transpose();
    h << acc_h, -b;
    Polytope piece = add_rows(p, H, h, tol);
    if (piece.is_full_dimensional(tol.interior)) out.push_back(remove_redundancy(piece, tol));
    acc_H.conservativeResize(acc_H.rows() + 1, Eigen::NoChange);
    acc_H.row(acc_H.rows() - 1) = a.transpose();
    acc_h.conservativeResize(acc_h.size() + 1);
    acc_h(acc_h.size() - 1) = b;
  }
  return out;
}

std::pair<VectorXd, double> facet_chebyshev(const FacetPiece& f, const Tolerances& tol) {
  const int n = static_cast<int>(f.a.size());
  VectorXd weights(f.h.size());
  for (int i = 0; i < f.h.size(); ++i) {
    const VectorXd g = f.H.row(i).transpose();
    weights(i) = (g - g.dot(f.a) * f.a).norm();
  }
  MatrixXd Aeq = f.a.transpose();
  VectorXd beq = VectorXd::Constant(1, f.b);
  return chebyshev_lp(f.H, f.h, weights, Aeq, beq, n, tol);
}

FacetPiece facet_of(const Polytope& p, int i) {
  FacetPiece f;
  f.a = p.H().row(i).transpose();
  f.b = p.h()(i);
  f.H.resize(p.rows() - 1, p.dim());
  f.h.resize(p.rows() - 1);
  int r = 0;
  for (int j = 0; j < p.rows(); ++j) {
    if (j == i) continue;
    f.H.row(r) = p.H().row(j);
    f.h(r) = p.h()(j);
    ++r;
  }
  return f;
}

std::vector<FacetPiece> facet_difference(const FacetPiece& f, const Polytope& q,
                                         const Tolerances& tol) {
  if (q.is_empty()) return {f};
  // Rows of q restricted to the hyperplane: constant rows either never cut or
  // exclude the hyperplane entirely.
  std::vector<int> cutting;
  for (int j = 0; j < q.rows(); ++j) {
    const VectorXd g = q.H().row(j).transpose();
    const VectorXd gp = g - g.dot(f.a) * f.a;
    if (gp.norm() < 1e-9) {
      if (g.dot(f.a) * f.b > q.h()(j) + tol.feas) return {f};
      continue;
    }
    cutting.push_back(j);
  }
  auto with_rows = [&](const MatrixXd& H, const VectorXd& h) {
    FacetPiece g = f;
    g.H.conservativeResize(f.H.rows() + H.rows(), Eigen::NoChange);
    g.h.conservativeResize(f.h.size() + h.size());
    g.H.bottomRows(H.rows()) = H;
    g.h.tail(h.size()) = h;
    return g;
  };
  MatrixXd QH(static_cast<Eigen::Index>(cutting.size()), q.dim());
  VectorXd Qh(static_cast<Eigen::Index>(cutting.size()));
  for (std::size_t r = 0; r < cutting.size(); ++r) {
    QH.row(r) = q.H().row(cutting[r]);
    Qh(r) = q.h()(cutting[r]);
  }
  if (facet_chebyshev(with_rows(QH, Qh), tol).second < tol.interior) return {f};

  std::vector<FacetPiece> out;
  for (std::size_t i = 0; i < cutting.size(); ++i) {
    MatrixXd H(static_cast<Eigen::Index>(i) + 1, q.dim());
    VectorXd h(static_cast<Eigen::Index>(i) + 1);
    H.topRows(i) = QH.topRows(i);
    h.head(i) = Qh.head(i);
    H.row(i) = -QH.row(i);
    h(i) = -Qh(i);
    FacetPiece piece = with_rows(H, h);
    if (facet_chebyshev(piece, tol).second >= tol.interior) out.push_back(std::move(piece));
  }
  return out;
}

namespace {

VectorXd random_direction(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  VectorXd d(n);
  do {
    for (int i = 0; i < n; ++i) d(i) = normal(rng);
  } while (d.norm() < 1e-12);
  return d.normalized();
}

// Feasible step interval [lo, hi] for x + t d inside {H y <= h}.
std::pair<double, double> chord(const MatrixXd& H, const VectorXd& h, const VectorXd& x,
                                const VectorXd& d) {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  const VectorXd slack = h - H * x;
  const VectorXd rate = H * d;
  for (int i = 0; i < h.size(); ++i) {
    if (rate(i) > 1e-14)
      hi = std::min(hi, slack(i) / rate(i));
    else if (rate(i) < -1e-14)
      lo = std::max(lo, slack(i) / rate(i));
  }
  return {std::min(lo, 0.0), std::max(hi, 0.0)};
}

std::vector<VectorXd> hit_and_run(const MatrixXd& H, const VectorXd& h, const VectorXd& start,
                                  const VectorXd* normal, int count, std::mt19937_64& rng) {
  const int n = static_cast<int>(start.size());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<VectorXd> out;
  VectorXd x = start;
  constexpr int kBurn = 50;
  constexpr int kThin = 5;
  for (int it = 0; static_cast<int>(out.size()) < count; ++it) {
    VectorXd d = random_direction(n, rng);
    if (normal != nullptr) {
      d -= d.dot(*normal) * *normal;
      if (d.norm() < 1e-12) continue;
      d.normalize();
    }
    auto [lo, hi] = chord(H, h, x, d);
    if (!std::isfinite(lo) || !std::isfinite(hi)) throw UnboundedError("sampling an unbounded set");
    x += (lo + (hi - lo) * unit(rng)) * d;
    if (it >= kBurn && (it - kBurn) % kThin == 0) out.push_back(x);
  }
  return out;
}

}  // namespace

std::vector<VectorXd> sample_uniform(const Polytope& p, int count, std::mt19937_64& rng,
                                     const Tolerances& tol) {
  if (count <= 0) return {};
  if (!p.is_full_dimensional(tol.interior))
    throw InputError("sample_uniform: polytope has empty interior");
  auto [lo, hi] = bounding_box(p, tol);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<VectorXd> out;
  out.reserve(count);
  const int n = p.dim();
  const long max_draws = 64L * count;
  for (long draw = 0; draw < max_draws && static_cast<int>(out.size()) < count; ++draw) {
    VectorXd x(n);
    for (int i = 0; i < n; ++i) x(i) = lo(i) + (hi(i) - lo(i)) * unit(rng);
    if (p.contains(x, 0.0)) out.push_back(std::move(x));
  }
  if (static_cast<int>(out.size()) < count) {
    auto extra = hit_and_run(p.H(), p.h(), p.chebyshev_center(), nullptr,
                             count - static_cast<int>(out.size()), rng);
    out.insert(out.end(), extra.begin(), extra.end());
  }
  return out;
}

std::vector<VectorXd> sample_facet(const FacetPiece& f, int count, std::mt19937_64& rng,
                                   const Tolerances& tol) {
  if (count <= 0) return {};
  auto [c, r] = facet_chebyshev(f, tol);
  if (r < 0.0) throw InputError("sample_facet: facet piece is empty");
  // A facet of a 1-D set is a point.
  if (r < tol.interior || f.a.size() == 1) return std::vector<VectorXd>(count, c);
  return hit_and_run(f.H, f.h, c, &f.a, count, rng);
}

PartitionReport check_partition(const Partition& part, std::mt19937_64& rng,
                                const Tolerances& tol, const Budgets& budgets) {
  PartitionReport rep;
  const auto& cells = part.cells;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    for (std::size_t j = i + 1; j < cells.size(); ++j) {
      Polytope both = add_rows(cells[i], cells[j].H(), cells[j].h(), tol);
      if (both.is_full_dimensional(tol.interior)) ++rep.overlapping_pairs;
    }
  }
  auto samples = sample_uniform(part.parent, budgets.coverage_samples, rng, tol);
  MatrixXd pts(part.parent.dim(), static_cast<Eigen::Index>(samples.size()));
  for (std::size_t k = 0; k < samples.size(); ++k) pts.col(static_cast<Eigen::Index>(k)) = samples[k];
  auto cov = covered_by_any(cells, pts, tol.feas);
  rep.coverage = samples.empty()
                     ? 1.0
                     : static_cast<double>(std::count(cov.begin(), cov.end(), true)) /
                           static_cast<double>(samples.size());
  return rep;
}

std::vector<bool> covered_by_any(const std::vector<Polytope>& polys, const MatrixXd& pts,
                                 double tol) {
  const int count = static_cast<int>(pts.cols());
  const int dim = static_cast<int>(pts.rows());
  std::vector<bool> out(count, false);
  if (count == 0) return out;
  const MatrixXd coord_major = pts.transpose();  // column-major: coordinate d at d*count + k
  std::vector<double> slack(count);
  for (const auto& p : polys) {
    if (p.is_empty()) continue;
    if (p.dim() != dim) throw InputError("covered_by_any: dimension mismatch");
    const RowMajor H = p.H();
    kernels::max_slack({H.data(), static_cast<std::size_t>(H.size())},
                       {p.h().data(), static_cast<std::size_t>(p.h().size())}, dim,
                       {coord_major.data(), static_cast<std::size_t>(coord_major.size())}, count,
                       slack);
    for (int k = 0; k < count; ++k)
      if (slack[k] <= tol) out[k] = true;
  }
  return out;
}

}  // namespace hinfx
