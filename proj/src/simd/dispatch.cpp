#include <cstdlib>
#include <string>

#include "stairloc/error.hpp"
#include "stairloc/simd/kernels.hpp"

namespace stairloc::simd {

#if !defined(STAIRLOC_HAVE_AVX2)
const KernelTable* avx2_kernels() { return nullptr; }
#endif

std::string_view to_string(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
#if defined(STAIRLOC_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
      return avx2_kernels() != nullptr && __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

Quad make_quad(const double origin[3], const double axis_a[3], const double axis_b[3], double lo_a, double hi_a,
               double lo_b, double hi_b) {
  Quad q{};
  q.ox = origin[0];
  q.oy = origin[1];
  q.oz = origin[2];
  q.ax = axis_a[0];
  q.ay = axis_a[1];
  q.az = axis_a[2];
  q.bx = axis_b[0];
  q.by = axis_b[1];
  q.bz = axis_b[2];
  q.nx = q.ay * q.bz - q.az * q.by;
  q.ny = q.az * q.bx - q.ax * q.bz;
  q.nz = q.ax * q.by - q.ay * q.bx;
  q.lo_a = lo_a;
  q.hi_a = hi_a;
  q.lo_b = lo_b;
  q.hi_b = hi_b;
  q.n_dot_o = (q.nx * q.ox + q.ny * q.oy) + q.nz * q.oz;
  return q;
}

Isa active_isa() {
  static const Isa isa = [] {
    if (const char* env = std::getenv("STAIRLOC_SIMD")) {
      const std::string want(env);
      if (want == "scalar") return Isa::Scalar;
      if (want == "avx2") {
        if (!isa_supported(Isa::Avx2))
          throw Error(ErrorCode::InvariantError, "STAIRLOC_SIMD=avx2 but AVX2 is unavailable");
        return Isa::Avx2;
      }
    }
    return isa_supported(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar;
  }();
  return isa;
}

const KernelTable& kernels_for(Isa isa) {
  if (isa == Isa::Avx2 && isa_supported(Isa::Avx2)) return *avx2_kernels();
  return scalar_kernels();
}

const KernelTable& kernels() {
  static const KernelTable& table = kernels_for(active_isa());
  return table;
}

}  // namespace stairloc::simd
