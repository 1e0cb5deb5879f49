#include <immintrin.h>

#include <limits>

#include "hinfx/kernels.hpp"

// Four points per lane group; tails fall back to the scalar reference, which
// performs identical per-point arithmetic.

namespace hinfx::kernels::avx2 {

void max_slack(const double* H, const double* h, int rows, int dim, const double* pts, int count,
               double* out) {
  const int vec_end = count - count % 4;
  const __m256d neg_inf = _mm256_set1_pd(-std::numeric_limits<double>::infinity());
  for (int k = 0; k < vec_end; k += 4) {
    __m256d best = neg_inf;
    for (int r = 0; r < rows; ++r) {
      const double* a = H + static_cast<long>(r) * dim;
      __m256d acc = _mm256_setzero_pd();
      for (int d = 0; d < dim; ++d) {
        const __m256d x = _mm256_loadu_pd(pts + static_cast<long>(d) * count + k);
        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_set1_pd(a[d]), x));
      }
      acc = _mm256_sub_pd(acc, _mm256_set1_pd(h[r]));
      // Strict comparison keeps the scalar tie behavior.
      const __m256d gt = _mm256_cmp_pd(acc, best, _CMP_GT_OQ);
      best = _mm256_blendv_pd(best, acc, gt);
    }
    _mm256_storeu_pd(out + k, best);
  }
  for (int k = vec_end; k < count; ++k) {
    double b = -std::numeric_limits<double>::infinity();
    for (int r = 0; r < rows; ++r) {
      const double* a = H + static_cast<long>(r) * dim;
      double acc = 0.0;
      for (int d = 0; d < dim; ++d) acc = acc + a[d] * pts[static_cast<long>(d) * count + k];
      acc = acc - h[r];
      if (acc > b) b = acc;
    }
    out[k] = b;
  }
}

void quad_eval(const double* Q, const double* q, double s, int dim, const double* pts, int count,
               double* out) {
  const int vec_end = count - count % 4;
  const __m256d half = _mm256_set1_pd(0.5);
  for (int k = 0; k < vec_end; k += 4) {
    __m256d val = _mm256_setzero_pd();
    for (int i = 0; i < dim; ++i) {
      __m256d t = _mm256_setzero_pd();
      for (int j = 0; j < dim; ++j) {
        const __m256d xj = _mm256_loadu_pd(pts + static_cast<long>(j) * count + k);
        t = _mm256_add_pd(t, _mm256_mul_pd(_mm256_set1_pd(Q[i * dim + j]), xj));
      }
      const __m256d xi = _mm256_loadu_pd(pts + static_cast<long>(i) * count + k);
      const __m256d inner = _mm256_add_pd(_mm256_mul_pd(half, t), _mm256_set1_pd(q[i]));
      val = _mm256_add_pd(val, _mm256_mul_pd(xi, inner));
    }
    _mm256_storeu_pd(out + k, _mm256_add_pd(val, _mm256_set1_pd(s)));
  }
  if (vec_end < count) {
    // Tail points are strided by `count`, so evaluate them one by one.
    for (int k = vec_end; k < count; ++k) {
      double v = 0.0;
      for (int i = 0; i < dim; ++i) {
        double t = 0.0;
        for (int j = 0; j < dim; ++j) t = t + Q[i * dim + j] * pts[static_cast<long>(j) * count + k];
        v = v + pts[static_cast<long>(i) * count + k] * (0.5 * t + q[i]);
      }
      out[k] = v + s;
    }
  }
}

}  // namespace hinfx::kernels::avx2
