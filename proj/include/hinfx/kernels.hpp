#pragma once

#include <span>
#include <string_view>

// Batched arithmetic over point clouds: the only data-parallel inner loops in
// the library (coverage sweeps, membership checks, sampled evaluation).
//
// Point clouds are stored coordinate-major: coordinate d of point k lives at
// pts[d * count + k]. Every variant performs the same operations in the same
// order per point, so results are bitwise identical across variants.

namespace hinfx::kernels {

enum class Isa { Scalar, Avx2 };

/// out[k] = max_r (H.row(r) . x_k - h[r]); -inf when there are no rows.
/// H is row-major with `dim` columns.
void max_slack(std::span<const double> H, std::span<const double> h, int dim,
               std::span<const double> pts, int count, std::span<double> out);

/// out[k] = 1/2 x_k' Q x_k + q' x_k + s, Q row-major dim x dim.
void quad_eval(std::span<const double> Q, std::span<const double> q, double s, int dim,
               std::span<const double> pts, int count, std::span<double> out);

/// Variant selected at first use from CPU features; HINFX_FORCE_SCALAR=1 in
/// the environment pins the scalar reference.
Isa active_isa();
std::string_view isa_name(Isa isa);
bool isa_available(Isa isa);

namespace scalar {
void max_slack(const double* H, const double* h, int rows, int dim, const double* pts, int count,
               double* out);
void quad_eval(const double* Q, const double* q, double s, int dim, const double* pts, int count,
               double* out);
}  // namespace scalar

#if defined(HINFX_HAVE_AVX2)
namespace avx2 {
void max_slack(const double* H, const double* h, int rows, int dim, const double* pts, int count,
               double* out);
void quad_eval(const double* Q, const double* q, double s, int dim, const double* pts, int count,
               double* out);
}  // namespace avx2
#endif

}  // namespace hinfx::kernels
