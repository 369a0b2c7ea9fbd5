#include <cstdlib>
#include <cstring>

#include "backends.hpp"
#include "mansel/core/log.hpp"
#include "mansel/core/types.hpp"

namespace mansel::kernels {

namespace {

bool cpu_has_avx2() {
#if MANSEL_HAVE_AVX2_BACKEND
  return __builtin_cpu_supports("avx2") != 0;
#else
  return false;
#endif
}

Backend pick_default() {
  if (const char* env = std::getenv("MANSEL_KERNELS")) {
    if (std::strcmp(env, "scalar") == 0) return Backend::Scalar;
    if (std::strcmp(env, "avx2") == 0) {
      if (cpu_has_avx2()) return Backend::Avx2;
      log::warn("MANSEL_KERNELS=avx2 requested but CPU lacks AVX2; using scalar");
      return Backend::Scalar;
    }
    log::warn(std::string("unknown MANSEL_KERNELS value '") + env + "'; using auto");
  }
  return cpu_has_avx2() ? Backend::Avx2 : Backend::Scalar;
}

struct State {
  Backend backend = pick_default();
};

State& state() {
  static State s;
  return s;
}

}  // namespace

const char* backend_name(Backend b) {
  return b == Backend::Avx2 ? "avx2" : "scalar";
}

bool backend_supported(Backend b) {
  if (b == Backend::Scalar) return true;
  return cpu_has_avx2();
}

Backend active_backend() { return state().backend; }

void force_backend(Backend b) {
  if (!backend_supported(b))
    throw Error(std::string("kernel backend '") + backend_name(b) +
                "' is not supported on this CPU");
  state().backend = b;
}

const Ops& ops() {
#if MANSEL_HAVE_AVX2_BACKEND
  if (state().backend == Backend::Avx2) return avx2::table;
#endif
  return scalar::table;
}

double dot(const double* a, const double* b, size_t n) { return ops().dot(a, b, n); }
double nrm2sq(const double* a, size_t n) { return ops().nrm2sq(a, n); }

void spmv(const Csr& m, const double* x, double* y) {
  ops().spmv(m.rows, m.indptr.data(), m.indices.data(), m.values.data(), x, y);
}

}  // namespace mansel::kernels
