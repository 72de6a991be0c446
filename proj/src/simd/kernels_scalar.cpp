#include <limits>

#include "stairloc/simd/kernels.hpp"

namespace stairloc::simd {

namespace {

void unproject_scalar(const PinholeParams& k, const double* u, const double* v, const double* d, std::size_t n,
                      double* x, double* y, double* z) {
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = (u[i] - k.cx) / k.fx * d[i];
    y[i] = (v[i] - k.cy) / k.fy * d[i];
    z[i] = d[i];
  }
}

void raycast_scalar(const double* dir_x, const double* dir_y, std::size_t n, const Quad* quads, std::size_t n_quads,
                    double* t_out) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  constexpr double eps = kQuadEdgeTolerance;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = dir_x[i];
    const double dy = dir_y[i];
    double best = inf;
    for (std::size_t q = 0; q < n_quads; ++q) {
      const Quad& s = quads[q];
      const double denom = (s.nx * dx + s.ny * dy) + s.nz;
      const double t = s.n_dot_o / denom;
      const double rx = t * dx - s.ox;
      const double ry = t * dy - s.oy;
      const double rz = t - s.oz;
      const double a = (rx * s.ax + ry * s.ay) + rz * s.az;
      const double b = (rx * s.bx + ry * s.by) + rz * s.bz;
      const bool hit = denom != 0.0 && t > eps && a >= s.lo_a - eps && a <= s.hi_a + eps && b >= s.lo_b - eps &&
                       b <= s.hi_b + eps && t < best;
      if (hit) best = t;
    }
    t_out[i] = best == inf ? 0.0 : best;
  }
}

Sum3 sum3_scalar(const double* x, const double* y, const double* z, std::size_t n) {
  double lx[4] = {0, 0, 0, 0}, ly[4] = {0, 0, 0, 0}, lz[4] = {0, 0, 0, 0};
  for (std::size_t i = 0; i < n; ++i) {
    lx[i % 4] += x[i];
    ly[i % 4] += y[i];
    lz[i % 4] += z[i];
  }
  return {(lx[0] + lx[1]) + (lx[2] + lx[3]), (ly[0] + ly[1]) + (ly[2] + ly[3]), (lz[0] + lz[1]) + (lz[2] + lz[3])};
}

Moments2 moments2_scalar(const double* x, const double* y, std::size_t n, double mx, double my) {
  double xx[4] = {0, 0, 0, 0}, xy[4] = {0, 0, 0, 0}, yy[4] = {0, 0, 0, 0};
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    xx[i % 4] += dx * dx;
    xy[i % 4] += dx * dy;
    yy[i % 4] += dy * dy;
  }
  return {(xx[0] + xx[1]) + (xx[2] + xx[3]), (xy[0] + xy[1]) + (xy[2] + xy[3]), (yy[0] + yy[1]) + (yy[2] + yy[3])};
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{Isa::Scalar, unproject_scalar, raycast_scalar, sum3_scalar, moments2_scalar};
  return table;
}

}  // namespace stairloc::simd
