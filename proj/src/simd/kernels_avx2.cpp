// Compiled with -mavx2 only; callers reach it through the dispatcher after a
// runtime CPU check.
#include <immintrin.h>

#include <limits>

#include "stairloc/simd/kernels.hpp"

namespace stairloc::simd {

namespace {

void unproject_avx2(const PinholeParams& k, const double* u, const double* v, const double* d, std::size_t n,
                    double* x, double* y, double* z) {
  const __m256d cx = _mm256_set1_pd(k.cx), cy = _mm256_set1_pd(k.cy);
  const __m256d fx = _mm256_set1_pd(k.fx), fy = _mm256_set1_pd(k.fy);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d dd = _mm256_loadu_pd(d + i);
    const __m256d xs = _mm256_mul_pd(_mm256_div_pd(_mm256_sub_pd(_mm256_loadu_pd(u + i), cx), fx), dd);
    const __m256d ys = _mm256_mul_pd(_mm256_div_pd(_mm256_sub_pd(_mm256_loadu_pd(v + i), cy), fy), dd);
    _mm256_storeu_pd(x + i, xs);
    _mm256_storeu_pd(y + i, ys);
    _mm256_storeu_pd(z + i, dd);
  }
  for (; i < n; ++i) {
    x[i] = (u[i] - k.cx) / k.fx * d[i];
    y[i] = (v[i] - k.cy) / k.fy * d[i];
    z[i] = d[i];
  }
}

void raycast_avx2(const double* dir_x, const double* dir_y, std::size_t n, const Quad* quads, std::size_t n_quads,
                  double* t_out) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  const __m256d vinf = _mm256_set1_pd(inf);
  const __m256d veps = _mm256_set1_pd(kQuadEdgeTolerance);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d dx = _mm256_loadu_pd(dir_x + i);
    const __m256d dy = _mm256_loadu_pd(dir_y + i);
    __m256d best = vinf;
    for (std::size_t q = 0; q < n_quads; ++q) {
      const Quad& s = quads[q];
      const __m256d denom = _mm256_add_pd(
          _mm256_add_pd(_mm256_mul_pd(_mm256_set1_pd(s.nx), dx), _mm256_mul_pd(_mm256_set1_pd(s.ny), dy)),
          _mm256_set1_pd(s.nz));
      const __m256d t = _mm256_div_pd(_mm256_set1_pd(s.n_dot_o), denom);
      const __m256d rx = _mm256_sub_pd(_mm256_mul_pd(t, dx), _mm256_set1_pd(s.ox));
      const __m256d ry = _mm256_sub_pd(_mm256_mul_pd(t, dy), _mm256_set1_pd(s.oy));
      const __m256d rz = _mm256_sub_pd(t, _mm256_set1_pd(s.oz));
      const __m256d a = _mm256_add_pd(
          _mm256_add_pd(_mm256_mul_pd(rx, _mm256_set1_pd(s.ax)), _mm256_mul_pd(ry, _mm256_set1_pd(s.ay))),
          _mm256_mul_pd(rz, _mm256_set1_pd(s.az)));
      const __m256d b = _mm256_add_pd(
          _mm256_add_pd(_mm256_mul_pd(rx, _mm256_set1_pd(s.bx)), _mm256_mul_pd(ry, _mm256_set1_pd(s.by))),
          _mm256_mul_pd(rz, _mm256_set1_pd(s.bz)));
      __m256d hit = _mm256_cmp_pd(denom, zero, _CMP_NEQ_OQ);
      hit = _mm256_and_pd(hit, _mm256_cmp_pd(t, veps, _CMP_GT_OQ));
      hit = _mm256_and_pd(hit, _mm256_cmp_pd(a, _mm256_sub_pd(_mm256_set1_pd(s.lo_a), veps), _CMP_GE_OQ));
      hit = _mm256_and_pd(hit, _mm256_cmp_pd(a, _mm256_add_pd(_mm256_set1_pd(s.hi_a), veps), _CMP_LE_OQ));
      hit = _mm256_and_pd(hit, _mm256_cmp_pd(b, _mm256_sub_pd(_mm256_set1_pd(s.lo_b), veps), _CMP_GE_OQ));
      hit = _mm256_and_pd(hit, _mm256_cmp_pd(b, _mm256_add_pd(_mm256_set1_pd(s.hi_b), veps), _CMP_LE_OQ));
      hit = _mm256_and_pd(hit, _mm256_cmp_pd(t, best, _CMP_LT_OQ));
      best = _mm256_blendv_pd(best, t, hit);
    }
    const __m256d missed = _mm256_cmp_pd(best, vinf, _CMP_EQ_OQ);
    _mm256_storeu_pd(t_out + i, _mm256_blendv_pd(best, zero, missed));
  }
  if (i < n) scalar_kernels().raycast(dir_x + i, dir_y + i, n - i, quads, n_quads, t_out + i);
}

double reduce_lanes(__m256d v, const double* tail, std::size_t tail_start, std::size_t n) {
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, v);
  for (std::size_t i = tail_start; i < n; ++i) lanes[i % 4] += tail[i];
  return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

Sum3 sum3_avx2(const double* x, const double* y, const double* z, std::size_t n) {
  __m256d sx = _mm256_setzero_pd(), sy = _mm256_setzero_pd(), sz = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    sx = _mm256_add_pd(sx, _mm256_loadu_pd(x + i));
    sy = _mm256_add_pd(sy, _mm256_loadu_pd(y + i));
    sz = _mm256_add_pd(sz, _mm256_loadu_pd(z + i));
  }
  return {reduce_lanes(sx, x, i, n), reduce_lanes(sy, y, i, n), reduce_lanes(sz, z, i, n)};
}

Moments2 moments2_avx2(const double* x, const double* y, std::size_t n, double mx, double my) {
  const __m256d vmx = _mm256_set1_pd(mx), vmy = _mm256_set1_pd(my);
  __m256d xx = _mm256_setzero_pd(), xy = _mm256_setzero_pd(), yy = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(x + i), vmx);
    const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(y + i), vmy);
    xx = _mm256_add_pd(xx, _mm256_mul_pd(dx, dx));
    xy = _mm256_add_pd(xy, _mm256_mul_pd(dx, dy));
    yy = _mm256_add_pd(yy, _mm256_mul_pd(dy, dy));
  }
  alignas(32) double lxx[4], lxy[4], lyy[4];
  _mm256_store_pd(lxx, xx);
  _mm256_store_pd(lxy, xy);
  _mm256_store_pd(lyy, yy);
  for (; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    lxx[i % 4] += dx * dx;
    lxy[i % 4] += dx * dy;
    lyy[i % 4] += dy * dy;
  }
  return {(lxx[0] + lxx[1]) + (lxx[2] + lxx[3]), (lxy[0] + lxy[1]) + (lxy[2] + lxy[3]),
          (lyy[0] + lyy[1]) + (lyy[2] + lyy[3])};
}

}  // namespace

const KernelTable* avx2_kernels() {
  static const KernelTable table{Isa::Avx2, unproject_avx2, raycast_avx2, sum3_avx2, moments2_avx2};
  return &table;
}

}  // namespace stairloc::simd
