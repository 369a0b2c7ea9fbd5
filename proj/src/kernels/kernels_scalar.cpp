#include <cmath>
#include <cstdint>

#include "backends.hpp"
#include "mansel/kernels/kernels.hpp"

// Reference implementations. These define the semantics every other
// backend is tested against; keep them branch-simple and allocation-free.

namespace mansel::kernels::scalar {

double dot(const double* a, const double* b, size_t n) {
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double nrm2sq(const double* a, size_t n) {
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i) acc += a[i] * a[i];
  return acc;
}

void axpy(double alpha, const double* x, double* y, size_t n) {
  for (size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void axpby(double alpha, const double* x, double beta, double* y, size_t n) {
  for (size_t i = 0; i < n; ++i) y[i] = alpha * x[i] + beta * y[i];
}

void scal(double alpha, double* x, size_t n) {
  for (size_t i = 0; i < n; ++i) x[i] *= alpha;
}

void clamp(double lo, double hi, double* x, size_t n) {
  for (size_t i = 0; i < n; ++i) x[i] = std::fmin(std::fmax(x[i], lo), hi);
}

void shrink(double kappa, double* x, size_t n) {
  for (size_t i = 0; i < n; ++i) {
    const double mag = std::fmax(std::fabs(x[i]) - kappa, 0.0);
    x[i] = std::copysign(mag, x[i]);
  }
}

void max0(double* x, size_t n) {
  for (size_t i = 0; i < n; ++i) x[i] = std::fmax(x[i], 0.0);
}

void spmv(int rows, const int* indptr, const int* indices, const double* values,
          const double* x, double* y) {
  for (int r = 0; r < rows; ++r) {
    double acc = 0.0;
    for (int k = indptr[r]; k < indptr[r + 1]; ++k) acc += values[k] * x[indices[k]];
    y[r] = acc;
  }
}

void rotate2d(const double* x, const double* y, double c, double s, double* xr,
              double* yr, size_t n) {
  for (size_t i = 0; i < n; ++i) {
    const double xi = x[i];
    const double yi = y[i];
    xr[i] = c * xi - s * yi;
    yr[i] = s * xi + c * yi;
  }
}

void count_close(const double* a, const double* b, double tol, int32_t* acc,
                 size_t n) {
  for (size_t i = 0; i < n; ++i) {
    // NaN operands fail the comparison and contribute nothing.
    if (std::fabs(a[i] - b[i]) <= tol) acc[i] += 1;
  }
}

void count_finite(const double* b, int32_t* acc, size_t n) {
  for (size_t i = 0; i < n; ++i) {
    if (std::isfinite(b[i])) acc[i] += 1;
  }
}

void backproject_row(const float* depth, const double* au, double bv, double c,
                     double s, double* X, double* Y, double* Z, size_t n) {
  for (size_t i = 0; i < n; ++i) {
    const double z = static_cast<double>(depth[i]);
    X[i] = z * (c + s * au[i]);
    Y[i] = z * (s - c * au[i]);
    Z[i] = -z * bv;
  }
}

const Ops table = {dot,    nrm2sq,   axpy,        axpby,       scal,
                   clamp,  shrink,   max0,        spmv,        rotate2d,
                   count_close, count_finite, backproject_row};

}  // namespace mansel::kernels::scalar
