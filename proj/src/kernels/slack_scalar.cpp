#include <limits>

#include "hinfx/kernels.hpp"

namespace hinfx::kernels::scalar {

void max_slack(const double* H, const double* h, int rows, int dim, const double* pts, int count,
               double* out) {
  for (int k = 0; k < count; ++k) out[k] = -std::numeric_limits<double>::infinity();
  for (int r = 0; r < rows; ++r) {
    const double* a = H + static_cast<long>(r) * dim;
    for (int k = 0; k < count; ++k) {
      double acc = 0.0;
      for (int d = 0; d < dim; ++d) acc = acc + a[d] * pts[static_cast<long>(d) * count + k];
      acc = acc - h[r];
      if (acc > out[k]) out[k] = acc;
    }
  }
}

void quad_eval(const double* Q, const double* q, double s, int dim, const double* pts, int count,
               double* out) {
  for (int k = 0; k < count; ++k) {
    double val = 0.0;
    for (int i = 0; i < dim; ++i) {
      double t = 0.0;
      for (int j = 0; j < dim; ++j) t = t + Q[i * dim + j] * pts[static_cast<long>(j) * count + k];
      val = val + pts[static_cast<long>(i) * count + k] * (0.5 * t + q[i]);
    }
    out[k] = val + s;
  }
}

}  // namespace hinfx::kernels::scalar
