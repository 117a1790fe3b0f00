#include <cstdlib>
#include <cstring>

#include "onebit/kernels/sov.hpp"

namespace onebit::kernels {

#ifdef ONEBIT_HAVE_AVX2_KERNELS
const KernelTable& avx2_kernel_table();
#endif

const KernelTable* avx2_kernels() {
#ifdef ONEBIT_HAVE_AVX2_KERNELS
  static const bool supported = [] {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  }();
  if (supported) return &avx2_kernel_table();
#endif
  return nullptr;
}

const KernelTable& active_kernels() {
  static const KernelTable* chosen = [] {
    const char* env = std::getenv("ONEBIT_KERNELS");
    if (env != nullptr && std::strcmp(env, "scalar") == 0) return &scalar_kernels();
    if (const KernelTable* avx2 = avx2_kernels()) return avx2;
    return &scalar_kernels();
  }();
  return *chosen;
}

}  // namespace onebit::kernels
