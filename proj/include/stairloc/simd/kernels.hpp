#pragma once

// Data-parallel inner loops of the pipeline. Every kernel has a scalar
// reference and, where the CPU allows, an AVX2 variant picked at runtime.
// Variants use the same operation order (no FMA contraction, fixed 4-lane
// reduction order) so their outputs are bit-identical.

#include <cstddef>
#include <span>
#include <string_view>

namespace stairloc::simd {

enum class Isa { Scalar, Avx2 };

std::string_view to_string(Isa isa);
bool isa_supported(Isa isa);

// Best supported ISA, unless STAIRLOC_SIMD=scalar|avx2 forces one.
Isa active_isa();

struct PinholeParams {
  double fx, fy, cx, cy;
};

// Bounded planar patch: points o + a*axis_a + b*axis_b with a in [lo_a, hi_a]
// and b in [lo_b, hi_b] (bounds may be infinite). `normal` need not be unit.
struct Quad {
  double ox, oy, oz;
  double nx, ny, nz;
  double ax, ay, az;
  double bx, by, bz;
  double lo_a, hi_a, lo_b, hi_b;
  double n_dot_o;
};

Quad make_quad(const double origin[3], const double axis_a[3], const double axis_b[3], double lo_a, double hi_a,
               double lo_b, double hi_b);

// Tolerance on quad bounds so rays through shared edges hit both faces.
inline constexpr double kQuadEdgeTolerance = 1e-9;

struct Sum3 {
  double x, y, z;
};

struct Moments2 {
  double sxx, sxy, syy;
};

struct KernelTable {
  Isa isa;
  // x[i] = (u[i] - cx) / fx * d[i], likewise y; z[i] = d[i].
  void (*unproject)(const PinholeParams& k, const double* u, const double* v, const double* d, std::size_t n,
                    double* x, double* y, double* z);
  // Rays from the origin along (dir_x[i], dir_y[i], 1). t_out[i] is the depth
  // (z) of the nearest quad hit, or 0 when the ray hits nothing.
  void (*raycast)(const double* dir_x, const double* dir_y, std::size_t n, const Quad* quads, std::size_t n_quads,
                  double* t_out);
  // Sums with element i accumulated into lane i % 4, lanes combined as
  // (l0 + l1) + (l2 + l3).
  Sum3 (*sum3)(const double* x, const double* y, const double* z, std::size_t n);
  // Central second moments about (mx, my), same lane order.
  Moments2 (*moments2)(const double* x, const double* y, std::size_t n, double mx, double my);
};

const KernelTable& scalar_kernels();
// Null when the build has no AVX2 variant.
const KernelTable* avx2_kernels();

const KernelTable& kernels_for(Isa isa);
const KernelTable& kernels();

}  // namespace stairloc::simd
