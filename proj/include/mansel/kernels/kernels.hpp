#pragma once

#include <cstddef>
#include <cstdint>

#include "mansel/core/sparse.hpp"

namespace mansel::kernels {

enum class Backend { Scalar = 0, Avx2 = 1 };

const char* backend_name(Backend b);

/// Backend in use for all kernel calls. Picked once at startup from CPU
/// capabilities, overridable through MANSEL_KERNELS=scalar|avx2 or
/// force_backend() (tests use the latter to run equivalence checks).
Backend active_backend();
bool backend_supported(Backend b);
void force_backend(Backend b);

/// Dispatch table. Every entry has a scalar reference implementation; the
/// AVX2 variants must agree with it elementwise exactly for map-style ops
/// and to floating-point roundoff for reductions (different summation
/// order), which tests/test_kernels.cpp asserts.
struct Ops {
  double (*dot)(const double* a, const double* b, size_t n);
  double (*nrm2sq)(const double* a, size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, size_t n);
  // y = alpha * x + beta * y
  void (*axpby)(double alpha, const double* x, double beta, double* y, size_t n);
  void (*scal)(double alpha, double* x, size_t n);
  void (*clamp)(double lo, double hi, double* x, size_t n);
  // Soft-threshold: x = sign(x) * max(|x| - kappa, 0)
  void (*shrink)(double kappa, double* x, size_t n);
  void (*max0)(double* x, size_t n);
  // y = A x for CSR (indptr/indices/values), shape rows x cols.
  void (*spmv)(int rows, const int* indptr, const int* indices,
               const double* values, const double* x, double* y);
  // out = (c*x - s*y, s*x + c*y) elementwise, the 2D rotation by angle t
  // with c = cos t, s = sin t.
  void (*rotate2d)(const double* x, const double* y, double c, double s,
                   double* xr, double* yr, size_t n);
  // acc[i] += 1 where |a[i] - b[i]| <= tol; NaN never matches.
  void (*count_close)(const double* a, const double* b, double tol,
                      int32_t* acc, size_t n);
  // acc[i] += 1 where b[i] is finite.
  void (*count_finite)(const double* b, int32_t* acc, size_t n);
  // Back-project one image row of optical-axis depths to axis-aligned
  // sensor-relative coordinates. au[i] = (u-cx)/fx per column, bv = (v-cy)/fy
  // for this row, (c,s) = (cos yaw, sin yaw):
  //   X = z*(c + s*au), Y = z*(s - c*au), Z = -z*bv.
  void (*backproject_row)(const float* depth, const double* au, double bv,
                          double c, double s, double* X, double* Y, double* Z,
                          size_t n);
};

const Ops& ops();

/// Convenience wrappers over the active dispatch table.
double dot(const double* a, const double* b, size_t n);
double nrm2sq(const double* a, size_t n);
void spmv(const Csr& m, const double* x, double* y);

}  // namespace mansel::kernels
