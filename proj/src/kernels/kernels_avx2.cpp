// AVX2 variants of the arithmetic kernels. Compiled with -mavx2 only (no
// FMA) so elementwise results match the scalar reference bit for bit;
// reductions keep four independent accumulators and fold them in a fixed
// order, so they agree with scalar up to roundoff but deterministically.

#include "backends.hpp"

#if MANSEL_HAVE_AVX2_BACKEND

#include <immintrin.h>

#include <cmath>
#include <cstdint>
#include <limits>

namespace mansel::kernels::avx2 {

namespace {

inline __m256d abs_pd(__m256d v) {
  const __m256d mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
  return _mm256_and_pd(v, mask);
}

inline double fold4(__m256d acc) {
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  return ((lanes[0] + lanes[1]) + lanes[2]) + lanes[3];
}

}  // namespace

double dot(const double* a, const double* b, size_t n) {
  __m256d acc = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d va = _mm256_loadu_pd(a + i);
    const __m256d vb = _mm256_loadu_pd(b + i);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(va, vb));
  }
  double tail = 0.0;
  for (; i < n; ++i) tail += a[i] * b[i];
  return fold4(acc) + tail;
}

double nrm2sq(const double* a, size_t n) {
  __m256d acc = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d va = _mm256_loadu_pd(a + i);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(va, va));
  }
  double tail = 0.0;
  for (; i < n; ++i) tail += a[i] * a[i];
  return fold4(acc) + tail;
}

void axpy(double alpha, const double* x, double* y, size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vx = _mm256_loadu_pd(x + i);
    const __m256d vy = _mm256_loadu_pd(y + i);
    _mm256_storeu_pd(y + i, _mm256_add_pd(vy, _mm256_mul_pd(va, vx)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void axpby(double alpha, const double* x, double beta, double* y, size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  const __m256d vb = _mm256_set1_pd(beta);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vx = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    const __m256d vy = _mm256_mul_pd(vb, _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(vx, vy));
  }
  for (; i < n; ++i) y[i] = alpha * x[i] + beta * y[i];
}

void scal(double alpha, double* x, size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) x[i] *= alpha;
}

void clamp(double lo, double hi, double* x, size_t n) {
  const __m256d vlo = _mm256_set1_pd(lo);
  const __m256d vhi = _mm256_set1_pd(hi);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_loadu_pd(x + i);
    v = _mm256_min_pd(_mm256_max_pd(v, vlo), vhi);
    _mm256_storeu_pd(x + i, v);
  }
  for (; i < n; ++i) x[i] = std::fmin(std::fmax(x[i], lo), hi);
}

void shrink(double kappa, double* x, size_t n) {
  const __m256d vk = _mm256_set1_pd(kappa);
  const __m256d zero = _mm256_setzero_pd();
  const __m256d signmask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x8000000000000000ULL));
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(x + i);
    const __m256d mag = _mm256_max_pd(_mm256_sub_pd(abs_pd(v), vk), zero);
    const __m256d sign = _mm256_and_pd(v, signmask);
    _mm256_storeu_pd(x + i, _mm256_or_pd(mag, sign));
  }
  for (; i < n; ++i) {
    const double mag = std::fmax(std::fabs(x[i]) - kappa, 0.0);
    x[i] = std::copysign(mag, x[i]);
  }
}

void max0(double* x, size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(x + i, _mm256_max_pd(_mm256_loadu_pd(x + i), zero));
  for (; i < n; ++i) x[i] = std::fmax(x[i], 0.0);
}

void spmv(int rows, const int* indptr, const int* indices, const double* values,
          const double* x, double* y) {
  for (int r = 0; r < rows; ++r) {
    const int begin = indptr[r];
    const int end = indptr[r + 1];
    __m256d acc = _mm256_setzero_pd();
    int k = begin;
    for (; k + 4 <= end; k += 4) {
      const __m256d vv = _mm256_loadu_pd(values + k);
      const __m256d vx = _mm256_set_pd(x[indices[k + 3]], x[indices[k + 2]],
                                       x[indices[k + 1]], x[indices[k]]);
      acc = _mm256_add_pd(acc, _mm256_mul_pd(vv, vx));
    }
    double tail = 0.0;
    for (; k < end; ++k) tail += values[k] * x[indices[k]];
    y[r] = fold4(acc) + tail;
  }
}

void rotate2d(const double* x, const double* y, double c, double s, double* xr,
              double* yr, size_t n) {
  const __m256d vc = _mm256_set1_pd(c);
  const __m256d vs = _mm256_set1_pd(s);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vx = _mm256_loadu_pd(x + i);
    const __m256d vy = _mm256_loadu_pd(y + i);
    _mm256_storeu_pd(xr + i, _mm256_sub_pd(_mm256_mul_pd(vc, vx), _mm256_mul_pd(vs, vy)));
    _mm256_storeu_pd(yr + i, _mm256_add_pd(_mm256_mul_pd(vs, vx), _mm256_mul_pd(vc, vy)));
  }
  for (; i < n; ++i) {
    const double xi = x[i];
    const double yi = y[i];
    xr[i] = c * xi - s * yi;
    yr[i] = s * xi + c * yi;
  }
}

void count_close(const double* a, const double* b, double tol, int32_t* acc,
                 size_t n) {
  const __m256d vtol = _mm256_set1_pd(tol);
  const __m256d one = _mm256_set1_pd(1.0);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d diff = abs_pd(_mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    const __m256d hit = _mm256_and_pd(_mm256_cmp_pd(diff, vtol, _CMP_LE_OQ), one);
    const __m128i inc = _mm256_cvtpd_epi32(hit);
    const __m128i cur = _mm_loadu_si128(reinterpret_cast<const __m128i*>(acc + i));
    _mm_storeu_si128(reinterpret_cast<__m128i*>(acc + i), _mm_add_epi32(cur, inc));
  }
  for (; i < n; ++i) {
    if (std::fabs(a[i] - b[i]) <= tol) acc[i] += 1;
  }
}

void count_finite(const double* b, int32_t* acc, size_t n) {
  const __m256d inf = _mm256_set1_pd(std::numeric_limits<double>::infinity());
  const __m256d one = _mm256_set1_pd(1.0);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d fin = _mm256_and_pd(_mm256_cmp_pd(abs_pd(_mm256_loadu_pd(b + i)), inf, _CMP_LT_OQ), one);
    const __m128i inc = _mm256_cvtpd_epi32(fin);
    const __m128i cur = _mm_loadu_si128(reinterpret_cast<const __m128i*>(acc + i));
    _mm_storeu_si128(reinterpret_cast<__m128i*>(acc + i), _mm_add_epi32(cur, inc));
  }
  for (; i < n; ++i) {
    if (std::isfinite(b[i])) acc[i] += 1;
  }
}

void backproject_row(const float* depth, const double* au, double bv, double c,
                     double s, double* X, double* Y, double* Z, size_t n) {
  const __m256d vc = _mm256_set1_pd(c);
  const __m256d vs = _mm256_set1_pd(s);
  const __m256d vnbv = _mm256_set1_pd(-bv);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d z = _mm256_cvtps_pd(_mm_loadu_ps(depth + i));
    const __m256d a = _mm256_loadu_pd(au + i);
    const __m256d sa = _mm256_mul_pd(vs, a);
    const __m256d ca = _mm256_mul_pd(vc, a);
    _mm256_storeu_pd(X + i, _mm256_mul_pd(z, _mm256_add_pd(vc, sa)));
    _mm256_storeu_pd(Y + i, _mm256_mul_pd(z, _mm256_sub_pd(vs, ca)));
    _mm256_storeu_pd(Z + i, _mm256_mul_pd(z, vnbv));
  }
  for (; i < n; ++i) {
    const double z = static_cast<double>(depth[i]);
    X[i] = z * (c + s * au[i]);
    Y[i] = z * (s - c * au[i]);
    Z[i] = -z * bv;
  }
}

const Ops table = {dot,    nrm2sq,   axpy,        axpby,       scal,
                   clamp,  shrink,   max0,        spmv,        rotate2d,
                   count_close, count_finite, backproject_row};

}  // namespace mansel::kernels::avx2

#endif  // MANSEL_HAVE_AVX2_BACKEND
