#include <cstdlib>
#include <cstring>
#include <stdexcept>

#include "hinfx/kernels.hpp"

namespace hinfx::kernels {

namespace {

Isa detect() {
  const char* force = std::getenv("HINFX_FORCE_SCALAR");
  if (force != nullptr && std::strcmp(force, "0") != 0) return Isa::Scalar;
#if defined(HINFX_HAVE_AVX2)
  if (__builtin_cpu_supports("avx2")) return Isa::Avx2;
#endif
  return Isa::Scalar;
}

}  // namespace

Isa active_isa() {
  static const Isa isa = detect();
  return isa;
}

std::string_view isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

bool isa_available(Isa isa) {
  if (isa == Isa::Scalar) return true;
#if defined(HINFX_HAVE_AVX2)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

void max_slack(std::span<const double> H, std::span<const double> h, int dim,
               std::span<const double> pts, int count, std::span<double> out) {
  const int rows = static_cast<int>(h.size());
  if (H.size() != static_cast<std::size_t>(rows) * dim ||
      pts.size() < static_cast<std::size_t>(dim) * count || out.size() < static_cast<std::size_t>(count))
    throw std::invalid_argument("max_slack: buffer sizes do not match");
#if defined(HINFX_HAVE_AVX2)
  if (active_isa() == Isa::Avx2) {
    avx2::max_slack(H.data(), h.data(), rows, dim, pts.data(), count, out.data());
    return;
  }
#endif
  scalar::max_slack(H.data(), h.data(), rows, dim, pts.data(), count, out.data());
}

void quad_eval(std::span<const double> Q, std::span<const double> q, double s, int dim,
               std::span<const double> pts, int count, std::span<double> out) {
  if (Q.size() != static_cast<std::size_t>(dim) * dim || q.size() != static_cast<std::size_t>(dim) ||
      pts.size() < static_cast<std::size_t>(dim) * count || out.size() < static_cast<std::size_t>(count))
    throw std::invalid_argument("quad_eval: buffer sizes do not match");
#if defined(HINFX_HAVE_AVX2)
  if (active_isa() == Isa::Avx2) {
    avx2::quad_eval(Q.data(), q.data(), s, dim, pts.data(), count, out.data());
    return;
  }
#endif
  scalar::quad_eval(Q.data(), q.data(), s, dim, pts.data(), count, out.data());
}

}  // namespace hinfx::kernels
