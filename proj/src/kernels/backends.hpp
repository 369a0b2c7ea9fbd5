#pragma once

#include "mansel/kernels/kernels.hpp"

namespace mansel::kernels {

namespace scalar {
extern const Ops table;
}

#if defined(__x86_64__) || defined(_M_X64)
#define MANSEL_HAVE_AVX2_BACKEND 1
namespace avx2 {
extern const Ops table;
}
#else
#define MANSEL_HAVE_AVX2_BACKEND 0
#endif

}  // namespace mansel::kernels
